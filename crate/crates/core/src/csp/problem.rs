use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::csp::Value;
use crate::error::{CspError, Result};

/// Index of a variable inside one [`Problem`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

/// Index of a value inside one variable's domain.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ValueId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A tuple aligned with a constraint scope, as value indices.
pub type Tuple = Vec<ValueId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Allowed tuples, kept sorted so equality and serialization are deterministic.
    Extensional(BTreeSet<Tuple>),
    /// Binary: the two values differ.
    NotEqual,
    /// Binary over words: `x[pos_a] == y[pos_b]`.
    LetterEquality { pos_a: usize, pos_b: usize },
}

impl Relation {
    pub fn is_extensional(&self) -> bool {
        matches!(self, Relation::Extensional(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Relation::Extensional(_) => "extensional",
            Relation::NotEqual => "not_equal",
            Relation::LetterEquality { .. } => "letter_equality",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub(crate) scope: Vec<VarId>,
    pub(crate) relation: Relation,
}

impl Constraint {
    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    /// Membership test for a tuple aligned with the scope.
    pub fn allows(&self, domains: &[Vec<Value>], tuple: &[ValueId]) -> bool {
        match &self.relation {
            Relation::Extensional(set) => set.contains(tuple),
            Relation::NotEqual => {
                let (x, y) = (self.scope[0].index(), self.scope[1].index());
                domains[x][tuple[0].index()] != domains[y][tuple[1].index()]
            }
            Relation::LetterEquality { pos_a, pos_b } => {
                let (x, y) = (self.scope[0].index(), self.scope[1].index());
                match (
                    domains[x][tuple[0].index()].letter_at(*pos_a),
                    domains[y][tuple[1].index()].letter_at(*pos_b),
                ) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                }
            }
        }
    }

    /// Extensional equivalent over the given domains.
    pub fn materialize(&self, domains: &[Vec<Value>]) -> BTreeSet<Tuple> {
        if let Relation::Extensional(set) = &self.relation {
            return set.clone();
        }
        let sizes: Vec<usize> = self.scope.iter().map(|v| domains[v.index()].len()).collect();
        let mut out = BTreeSet::new();
        for_each_tuple(&sizes, |t| {
            if self.allows(domains, t) {
                out.insert(t.to_vec());
            }
        });
        out
    }
}

/// Visits every tuple of the Cartesian product of `0..sizes[i]` in lexicographic order.
pub(crate) fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[ValueId])) {
    if sizes.contains(&0) {
        return;
    }
    let mut t = vec![ValueId(0); sizes.len()];
    loop {
        f(&t);
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i].0 += 1;
            if (t[i].0 as usize) < sizes[i] {
                break;
            }
            t[i].0 = 0;
        }
    }
}

/// A finite-domain constraint satisfaction problem.
///
/// Variables, domains and constraints are immutable once built. Value order
/// inside a domain is the static value ordering used by every solver.
#[derive(Clone, Debug)]
pub struct Problem {
    variables: Vec<String>,
    domains: Vec<Vec<Value>>,
    constraints: Vec<Constraint>,
    index: HashMap<String, VarId>,
}

impl Problem {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len() as u32).map(VarId)
    }

    pub fn name(&self, var: VarId) -> &str {
        &self.variables[var.index()]
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn domain(&self, var: VarId) -> &[Value] {
        &self.domains[var.index()]
    }

    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    pub fn value(&self, var: VarId, val: ValueId) -> &Value {
        &self.domains[var.index()][val.index()]
    }

    pub fn value_id(&self, var: VarId, value: &Value) -> Option<ValueId> {
        self.domains[var.index()]
            .iter()
            .position(|v| v == value)
            .map(|i| ValueId(i as u32))
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    /// Maximum domain size.
    pub fn d(&self) -> usize {
        self.domains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Maximum arity.
    pub fn r(&self) -> usize {
        self.constraints.iter().map(Constraint::arity).max().unwrap_or(0)
    }

    /// Number of constraints whose scope contains `var`.
    pub fn degree(&self, var: VarId) -> usize {
        self.constraints.iter().filter(|c| c.scope.contains(&var)).count()
    }

    pub fn is_extensional(&self) -> bool {
        self.constraints.iter().all(|c| c.relation.is_extensional())
    }

    /// Copy with every intensional constraint replaced by its tuple set.
    pub fn materialized(&self) -> Problem {
        let mut p = self.clone();
        for c in &mut p.constraints {
            if !c.relation.is_extensional() {
                c.relation = Relation::Extensional(c.materialize(&self.domains));
            }
        }
        p
    }

    /// Some domain or some extensional relation has no element.
    pub fn is_empty(&self) -> bool {
        self.domains.iter().any(Vec::is_empty)
            || self
                .constraints
                .iter()
                .any(|c| matches!(&c.relation, Relation::Extensional(s) if s.is_empty()))
    }

    /// Variables that occur in no constraint scope.
    pub fn unconstrained_variables(&self) -> Vec<VarId> {
        let mut seen = vec![false; self.n()];
        for c in &self.constraints {
            for v in &c.scope {
                seen[v.index()] = true;
            }
        }
        self.var_ids().filter(|v| !seen[v.index()]).collect()
    }

    pub(crate) fn from_parts(
        variables: Vec<String>,
        domains: Vec<Vec<Value>>,
        constraints: Vec<Constraint>,
    ) -> Problem {
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), VarId(i as u32)))
            .collect();
        Problem { variables, domains, constraints, index }
    }

    /// Validates a partial solution against this problem.
    pub fn check_partial(&self, t: &PartialSolution) -> Result<()> {
        let mut seen = HashSet::new();
        for &(v, a) in t.pairs() {
            if v.index() >= self.n() {
                return Err(CspError::UnknownVariable(v.to_string()));
            }
            if !seen.insert(v) {
                return Err(CspError::Precondition(format!(
                    "variable `{}` assigned twice",
                    self.name(v)
                )));
            }
            if a.index() >= self.domains[v.index()].len() {
                return Err(CspError::ValueNotInDomain {
                    var: self.name(v).to_owned(),
                    value: format!("#{}", a.0),
                });
            }
        }
        Ok(())
    }

    /// Builds a partial solution from `(name, value)` pairs.
    pub fn assignment<'a, V>(&self, pairs: impl IntoIterator<Item = (&'a str, V)>) -> Result<PartialSolution>
    where
        V: Into<Value>,
    {
        let mut t = PartialSolution::new();
        for (name, value) in pairs {
            let var = self.var(name).ok_or_else(|| CspError::UnknownVariable(name.to_owned()))?;
            let value = value.into();
            let val = self.value_id(var, &value).ok_or_else(|| CspError::ValueNotInDomain {
                var: name.to_owned(),
                value: value.to_string(),
            })?;
            t.push(var, val);
        }
        self.check_partial(&t)?;
        Ok(t)
    }
}

/// Incremental construction of a [`Problem`] with validation.
#[derive(Default, Debug)]
pub struct ProblemBuilder {
    variables: Vec<String>,
    domains: Vec<Vec<Value>>,
    constraints: Vec<Constraint>,
    index: HashMap<String, VarId>,
}

impl ProblemBuilder {
    pub fn variable<V: Into<Value>>(
        &mut self,
        name: impl Into<String>,
        values: impl IntoIterator<Item = V>,
    ) -> Result<VarId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(CspError::DuplicateVariable(name));
        }
        let values: Vec<Value> = values.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for v in &values {
            if !seen.insert(v) {
                return Err(CspError::DuplicateValue { var: name, value: v.to_string() });
            }
        }
        let id = VarId(self.variables.len() as u32);
        self.index.insert(name.clone(), id);
        self.variables.push(name);
        self.domains.push(values);
        Ok(id)
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    fn check_scope(&self, scope: &[VarId]) -> Result<()> {
        if scope.is_empty() {
            return Err(CspError::Scope("empty scope".into()));
        }
        let mut seen = HashSet::new();
        for v in scope {
            if v.index() >= self.variables.len() {
                return Err(CspError::UnknownVariable(v.to_string()));
            }
            if !seen.insert(*v) {
                return Err(CspError::Scope(format!(
                    "variable `{}` repeated in scope",
                    self.variables[v.index()]
                )));
            }
        }
        Ok(())
    }

    /// Adds an extensional constraint given as value tuples.
    pub fn extensional<V: Into<Value>>(
        &mut self,
        scope: &[VarId],
        tuples: impl IntoIterator<Item = Vec<V>>,
    ) -> Result<usize> {
        self.check_scope(scope)?;
        let mut set = BTreeSet::new();
        for tuple in tuples {
            if tuple.len() != scope.len() {
                return Err(CspError::Arity { arity: scope.len(), got: tuple.len() });
            }
            let mut ids = Vec::with_capacity(tuple.len());
            for (v, value) in scope.iter().zip(tuple) {
                let value = value.into();
                let pos = self.domains[v.index()].iter().position(|x| *x == value).ok_or_else(|| {
                    CspError::ValueNotInDomain {
                        var: self.variables[v.index()].clone(),
                        value: value.to_string(),
                    }
                })?;
                ids.push(ValueId(pos as u32));
            }
            set.insert(ids);
        }
        self.push(scope.to_vec(), Relation::Extensional(set))
    }

    /// Adds an extensional constraint given as value-index tuples.
    pub fn extensional_ids(&mut self, scope: &[VarId], tuples: BTreeSet<Tuple>) -> Result<usize> {
        self.check_scope(scope)?;
        for t in &tuples {
            if t.len() != scope.len() {
                return Err(CspError::Arity { arity: scope.len(), got: t.len() });
            }
            for (v, a) in scope.iter().zip(t) {
                if a.index() >= self.domains[v.index()].len() {
                    return Err(CspError::ValueNotInDomain {
                        var: self.variables[v.index()].clone(),
                        value: format!("#{}", a.0),
                    });
                }
            }
        }
        self.push(scope.to_vec(), Relation::Extensional(tuples))
    }

    pub fn not_equal(&mut self, x: VarId, y: VarId) -> Result<usize> {
        self.check_scope(&[x, y])?;
        self.push(vec![x, y], Relation::NotEqual)
    }

    pub fn letter_equality(&mut self, x: VarId, y: VarId, pos_a: usize, pos_b: usize) -> Result<usize> {
        self.check_scope(&[x, y])?;
        self.push(vec![x, y], Relation::LetterEquality { pos_a, pos_b })
    }

    fn push(&mut self, scope: Vec<VarId>, relation: Relation) -> Result<usize> {
        self.constraints.push(Constraint { scope, relation });
        Ok(self.constraints.len() - 1)
    }

    pub fn build(self) -> Problem {
        Problem {
            variables: self.variables,
            domains: self.domains,
            constraints: self.constraints,
            index: self.index,
        }
    }
}

/// An ordered assignment of values to distinct variables.
///
/// The order is instantiation order; the empty assignment is the search-tree root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialSolution {
    pairs: Vec<(VarId, ValueId)>,
}

impl PartialSolution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(VarId, ValueId)>) -> Self {
        PartialSolution { pairs }
    }

    pub fn push(&mut self, var: VarId, val: ValueId) {
        self.pairs.push((var, val));
    }

    pub fn pop(&mut self) -> Option<(VarId, ValueId)> {
        self.pairs.pop()
    }

    pub fn pairs(&self) -> &[(VarId, ValueId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn value_of(&self, var: VarId) -> Option<ValueId> {
        self.pairs.iter().find(|(v, _)| *v == var).map(|&(_, a)| a)
    }

    pub fn contains_var(&self, var: VarId) -> bool {
        self.pairs.iter().any(|(v, _)| *v == var)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.pairs.iter().map(|&(v, _)| v)
    }

    /// First `len` assignments.
    pub fn prefix(&self, len: usize) -> PartialSolution {
        PartialSolution { pairs: self.pairs[..len.min(self.pairs.len())].to_vec() }
    }

    /// Assignments of `self` whose variable is not assigned by `other`.
    pub fn without(&self, other: &PartialSolution) -> PartialSolution {
        PartialSolution {
            pairs: self.pairs.iter().copied().filter(|(v, _)| !other.contains_var(*v)).collect(),
        }
    }

    /// Order-independent identity of the assignment.
    pub fn as_set(&self) -> Vec<(VarId, ValueId)> {
        let mut s = self.pairs.clone();
        s.sort_unstable();
        s
    }

    /// Dense lookup table indexed by variable.
    pub fn to_dense(&self, n: usize) -> Vec<Option<ValueId>> {
        let mut out = vec![None; n];
        for &(v, a) in &self.pairs {
            out[v.index()] = Some(a);
        }
        out
    }

    /// Re-expresses the assignment over the variables of `to`, matching by name and value.
    pub fn translate(&self, from: &Problem, to: &Problem) -> Result<PartialSolution> {
        let mut out = PartialSolution::new();
        for &(v, a) in &self.pairs {
            let name = from.name(v);
            let nv = to.var(name).ok_or_else(|| CspError::UnknownVariable(name.to_owned()))?;
            let value = from.value(v, a);
            let na = to.value_id(nv, value).ok_or_else(|| CspError::ValueNotInDomain {
                var: name.to_owned(),
                value: value.to_string(),
            })?;
            out.push(nv, na);
        }
        Ok(out)
    }

    /// `(name, value)` rendering, in instantiation order.
    pub fn render(&self, problem: &Problem) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|&(v, a)| (problem.name(v).to_owned(), problem.value(v, a).to_string()))
            .collect()
    }
}

impl FromIterator<(VarId, ValueId)> for PartialSolution {
    fn from_iter<I: IntoIterator<Item = (VarId, ValueId)>>(iter: I) -> Self {
        PartialSolution { pairs: iter.into_iter().collect() }
    }
}
