//! Strong k-consistency by tuple deletion.
//!
//! Every relation is held as a dense boolean table over a sorted scope. Several
//! constraints over the same set of variables share one table (their intersection).
//! A pass over `j = 2..=k` looks at every consistent assignment `s` to `j - 1`
//! variables and every other variable `x`; if no value of `x` extends `s`, then `s`
//! is deleted: a domain value when `|s| = 1`, otherwise a tuple of the table over
//! exactly `vars(s)`, created on demand. Passes repeat until nothing changes. The
//! result is EMPTY as soon as a domain empties.
//!
//! Relations wider than `k` are never consulted: no assignment of at most `k`
//! variables covers their scope.

use std::collections::{BTreeSet, HashMap};

use crate::csp::{induce, Constraint, PartialSolution, Problem, Relation, Tuple, Value, ValueId, VarId};
use crate::error::{CspError, Result};
use crate::levels::LevelSet;

const TABLE_LIMIT: usize = 1 << 22;

/// One deletion made while enforcing strong k-consistency.
///
/// `scope` is empty when the whole problem was found empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRemoval {
    pub scope: Vec<String>,
    pub tuple: Vec<Value>,
    pub witness: String,
}

#[derive(Clone, Debug)]
pub struct KEnforcementResult {
    /// The strongly k-consistent problem, or `None` when the problem is EMPTY.
    pub problem: Option<Problem>,
    pub removals: Vec<KRemoval>,
}

impl KEnforcementResult {
    pub fn is_empty(&self) -> bool {
        self.problem.is_none()
    }
}

#[derive(Clone, Debug)]
struct Table {
    scope: Vec<usize>,
    strides: Vec<usize>,
    allowed: Vec<bool>,
    explanations: Vec<LevelSet>,
    created: bool,
}

impl Table {
    fn index(&self, vals: &[u32]) -> usize {
        self.scope.iter().zip(&self.strides).map(|(&v, &s)| vals[v] as usize * s).sum()
    }
}

/// A ledger entry: the deleted assignment (variables, values) and the variable that triggered it.
type Deletion = (Vec<usize>, Vec<u32>, usize);

#[derive(Clone, Debug)]
pub(crate) enum KOutcome {
    Empty { explanation: LevelSet },
    Consistent,
}

#[derive(Clone, Debug)]
pub(crate) struct KEngine {
    sizes: Vec<usize>,
    present: Vec<Vec<bool>>,
    remaining: Vec<usize>,
    value_explanations: Vec<Vec<LevelSet>>,
    tables: Vec<Table>,
    by_scope: HashMap<Vec<usize>, usize>,
    tables_of: Vec<Vec<usize>>,
    k: usize,
    explain: bool,
    ledger: Option<Vec<Deletion>>,
    pub checks: u64,
}

impl KEngine {
    pub fn new(sizes: Vec<usize>, k: usize, explain: bool, keep_ledger: bool) -> Self {
        let n = sizes.len();
        KEngine {
            present: sizes.iter().map(|&d| vec![true; d]).collect(),
            remaining: sizes.clone(),
            value_explanations: sizes.iter().map(|&d| vec![LevelSet::new(); d]).collect(),
            sizes,
            tables: Vec::new(),
            by_scope: HashMap::new(),
            tables_of: vec![Vec::new(); n],
            k,
            explain,
            ledger: keep_ledger.then(Vec::new),
            checks: 0,
        }
    }

    pub fn has(&self, x: usize, a: usize) -> bool {
        self.present[x][a]
    }

    pub fn size(&self, x: usize) -> usize {
        self.remaining[x]
    }

    pub fn value_explanation(&self, x: usize, a: usize) -> &LevelSet {
        &self.value_explanations[x][a]
    }

    fn table_for(&mut self, scope: &[usize]) -> Result<usize> {
        if let Some(&t) = self.by_scope.get(scope) {
            return Ok(t);
        }
        let mut strides = vec![1usize; scope.len()];
        let mut product = 1usize;
        for i in (0..scope.len()).rev() {
            strides[i] = product;
            product = product.saturating_mul(self.sizes[scope[i]].max(1));
        }
        if product > TABLE_LIMIT {
            return Err(CspError::TooLarge(format!("a relation over {} variables", scope.len())));
        }
        let id = self.tables.len();
        self.tables.push(Table {
            scope: scope.to_vec(),
            strides,
            allowed: vec![true; product],
            explanations: if self.explain { vec![LevelSet::new(); product] } else { Vec::new() },
            created: true,
        });
        self.by_scope.insert(scope.to_vec(), id);
        for &v in scope {
            self.tables_of[v].push(id);
        }
        Ok(id)
    }

    /// Adds a relation. `scope` must be sorted; each tuple is aligned with it.
    /// Tuples absent from `tuples` are excluded with `explanation` as their reason.
    pub fn add(&mut self, scope: &[usize], tuples: &[Vec<u32>], explanation: &LevelSet) -> Result<()> {
        debug_assert!(scope.windows(2).all(|w| w[0] < w[1]));
        if scope.len() == 1 {
            let x = scope[0];
            let mut keep = vec![false; self.sizes[x]];
            for t in tuples {
                keep[t[0] as usize] = true;
            }
            for (a, k) in keep.into_iter().enumerate() {
                if !k && self.present[x][a] {
                    self.drop_value(x, a, explanation.clone());
                    if let Some(l) = self.ledger.as_mut() {
                        l.push((vec![x], vec![a as u32], x));
                    }
                }
            }
            return Ok(());
        }
        if scope.len() > self.k {
            return Ok(());
        }
        let t = self.table_for(scope)?;
        let table = &mut self.tables[t];
        table.created = false;
        let mut keep = vec![false; table.allowed.len()];
        let mut vals = vec![0u32; self.sizes.len()];
        for tuple in tuples {
            for (&v, &a) in scope.iter().zip(tuple) {
                vals[v] = a;
            }
            keep[table.index(&vals)] = true;
        }
        for (i, k) in keep.into_iter().enumerate() {
            if !k && table.allowed[i] {
                table.allowed[i] = false;
                if self.explain {
                    table.explanations[i] = explanation.clone();
                }
            }
        }
        Ok(())
    }

    fn drop_value(&mut self, x: usize, a: usize, explanation: LevelSet) {
        self.present[x][a] = false;
        self.remaining[x] -= 1;
        if self.explain {
            self.value_explanations[x][a] = explanation;
        }
    }

    fn empty_outcome(&self, x: usize) -> KOutcome {
        let mut explanation = LevelSet::new();
        if self.explain {
            for e in &self.value_explanations[x] {
                explanation.union_with(e);
            }
        }
        KOutcome::Empty { explanation }
    }

    /// Runs to fixpoint.
    pub fn run(&mut self) -> Result<KOutcome> {
        let n = self.sizes.len();
        loop {
            if let Some(x) = (0..n).find(|&x| self.remaining[x] == 0) {
                if let Some(l) = self.ledger.as_mut() {
                    l.push((vec![], vec![], x));
                }
                return Ok(self.empty_outcome(x));
            }
            let mut changed = false;
            for j in 2..=self.k {
                let m = j - 1;
                if m >= n {
                    break;
                }
                let mut combo: Vec<usize> = (0..m).collect();
                loop {
                    if let Some(out) = self.sweep(&combo, &mut changed)? {
                        return Ok(out);
                    }
                    if !next_combination(&mut combo, n) {
                        break;
                    }
                }
            }
            if !changed {
                return Ok(KOutcome::Consistent);
            }
        }
    }

    /// Checks every consistent tuple over `vars` against every other variable.
    fn sweep(&mut self, vars: &[usize], changed: &mut bool) -> Result<Option<KOutcome>> {
        let n = self.sizes.len();
        let mut in_s = vec![false; n];
        for &v in vars {
            in_s[v] = true;
        }
        // tables that decide whether x extends s: contain x, scope within vars + x
        let mut witnesses: Vec<(usize, Vec<usize>)> = Vec::new();
        for x in 0..n {
            if in_s[x] {
                continue;
            }
            let rel: Vec<usize> = self.tables_of[x]
                .iter()
                .copied()
                .filter(|&t| self.tables[t].scope.iter().all(|&v| v == x || in_s[v]))
                .collect();
            if !rel.is_empty() {
                witnesses.push((x, rel));
            }
        }
        if witnesses.is_empty() {
            return Ok(None);
        }
        // tables checked when the i-th variable of `vars` is assigned
        let inner: Vec<Vec<usize>> = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                self.tables_of[v]
                    .iter()
                    .copied()
                    .filter(|&t| {
                        let s = &self.tables[t].scope;
                        *s.last().unwrap() == v && s.iter().all(|&w| in_s[w] && w <= vars[i])
                    })
                    .collect()
            })
            .collect();
        let mut vals = vec![0u32; n];
        let mut idx = vec![0usize; vars.len()];
        let mut depth = 0usize;
        // depth-first walk over consistent tuples of `vars`
        loop {
            let v = vars[depth];
            if idx[depth] >= self.sizes[v] {
                if depth == 0 {
                    return Ok(None);
                }
                idx[depth] = 0;
                depth -= 1;
                idx[depth] += 1;
                continue;
            }
            let a = idx[depth];
            if !self.present[v][a] {
                idx[depth] += 1;
                continue;
            }
            vals[v] = a as u32;
            let ok = inner[depth].iter().all(|&t| {
                self.checks += 1;
                let tb = &self.tables[t];
                tb.allowed[tb.index(&vals)]
            });
            if !ok {
                idx[depth] += 1;
                continue;
            }
            if depth + 1 < vars.len() {
                depth += 1;
                continue;
            }
            // a complete consistent tuple s
            for (x, rel) in &witnesses {
                let x = *x;
                let mut extended = false;
                for b in 0..self.sizes[x] {
                    if !self.present[x][b] {
                        continue;
                    }
                    vals[x] = b as u32;
                    if rel.iter().all(|&t| {
                        self.checks += 1;
                        let tb = &self.tables[t];
                        tb.allowed[tb.index(&vals)]
                    }) {
                        extended = true;
                        break;
                    }
                }
                if extended {
                    continue;
                }
                let explanation = if self.explain { self.extension_failure(x, rel, &mut vals) } else { LevelSet::new() };
                *changed = true;
                if let Some(l) = self.ledger.as_mut() {
                    l.push((vars.to_vec(), vars.iter().map(|&v| vals[v]).collect(), x));
                }
                if vars.len() == 1 {
                    self.drop_value(v, a, explanation);
                    if self.remaining[v] == 0 {
                        if let Some(l) = self.ledger.as_mut() {
                            l.push((vec![], vec![], v));
                        }
                        return Ok(Some(self.empty_outcome(v)));
                    }
                } else {
                    let t = self.table_for(vars)?;
                    let tb = &mut self.tables[t];
                    let i = tb.index(&vals);
                    tb.allowed[i] = false;
                    if self.explain {
                        tb.explanations[i] = explanation;
                    }
                }
                break;
            }
            idx[depth] += 1;
        }
    }

    /// Why no value of `x` extends the tuple currently held in `vals`.
    fn extension_failure(&self, x: usize, rel: &[usize], vals: &mut [u32]) -> LevelSet {
        let mut e = LevelSet::new();
        for b in 0..self.sizes[x] {
            if !self.present[x][b] {
                e.union_with(&self.value_explanations[x][b]);
                continue;
            }
            vals[x] = b as u32;
            if let Some(&t) = rel.iter().find(|&&t| !self.tables[t].allowed[self.tables[t].index(vals)]) {
                let tb = &self.tables[t];
                e.union_with(&tb.explanations[tb.index(vals)]);
            }
        }
        e
    }

    fn allowed_tuple(&self, scope: &[usize], tuple: &[u32]) -> bool {
        if tuple.iter().zip(scope).any(|(&a, &v)| !self.present[v][a as usize]) {
            return false;
        }
        if scope.len() < 2 || scope.len() > self.k {
            return true;
        }
        let mut order: Vec<usize> = (0..scope.len()).collect();
        order.sort_by_key(|&i| scope[i]);
        let sorted: Vec<usize> = order.iter().map(|&i| scope[i]).collect();
        match self.by_scope.get(&sorted) {
            None => true,
            Some(&t) => {
                let tb = &self.tables[t];
                let idx: usize = order.iter().zip(&tb.strides).map(|(&i, &s)| tuple[i] as usize * s).sum();
                tb.allowed[idx]
            }
        }
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let m = c.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if c[i] < n - m + i {
            c[i] += 1;
            for j in i + 1..m {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Makes `problem` strongly k-consistent, or reports it EMPTY.
pub fn enforce_strong_k(problem: &Problem, k: usize) -> Result<KEnforcementResult> {
    if let Some(i) = problem.constraints().iter().position(|c| !c.relation().is_extensional()) {
        return Err(CspError::MaterializationRequired(i));
    }
    if k == 0 || (k > problem.n() && problem.n() > 0) {
        return Err(CspError::Parameter(format!("k = {k} must lie in 1..={}", problem.n())));
    }
    let sizes: Vec<usize> = problem.domains().iter().map(Vec::len).collect();
    let mut engine = KEngine::new(sizes, k, false, true);
    for c in problem.constraints() {
        let (scope, tuples) = sorted_tuples(c);
        engine.add(&scope, &tuples, &LevelSet::new())?;
    }
    let outcome = engine.run()?;
    let names = |vars: &[usize]| vars.iter().map(|&v| problem.name(VarId(v as u32)).to_owned()).collect();
    let removals = engine
        .ledger
        .take()
        .unwrap_or_default()
        .into_iter()
        .map(|(scope, tuple, witness)| KRemoval {
            tuple: scope
                .iter()
                .zip(&tuple)
                .map(|(&v, &a)| problem.value(VarId(v as u32), ValueId(a)).clone())
                .collect(),
            scope: names(&scope),
            witness: problem.name(VarId(witness as u32)).to_owned(),
        })
        .collect();
    if let KOutcome::Empty { .. } = outcome {
        return Ok(KEnforcementResult { problem: None, removals });
    }

    // rebuild with filtered domains and re-indexed tuples
    let n = problem.n();
    let mut new_index: Vec<Vec<Option<u32>>> = Vec::with_capacity(n);
    let mut domains = Vec::with_capacity(n);
    for x in 0..n {
        let mut map = vec![None; engine.sizes[x]];
        let mut dom = Vec::new();
        for (a, slot) in map.iter_mut().enumerate() {
            if engine.present[x][a] {
                *slot = Some(dom.len() as u32);
                dom.push(problem.domain(VarId(x as u32))[a].clone());
            }
        }
        new_index.push(map);
        domains.push(dom);
    }
    let reindex = |scope: &[usize], t: &[u32]| -> Tuple {
        scope.iter().zip(t).map(|(&v, &a)| ValueId(new_index[v][a as usize].unwrap())).collect()
    };
    let mut constraints = Vec::new();
    for c in problem.constraints() {
        let scope: Vec<usize> = c.scope().iter().map(|v| v.index()).collect();
        let Relation::Extensional(set) = c.relation() else { unreachable!() };
        let kept: BTreeSet<Tuple> = set
            .iter()
            .map(|t| t.iter().map(|a| a.0).collect::<Vec<u32>>())
            .filter(|t| engine.allowed_tuple(&scope, t))
            .map(|t| reindex(&scope, &t))
            .collect();
        constraints.push(Constraint { scope: c.scope().to_vec(), relation: Relation::Extensional(kept) });
    }
    let mut created: Vec<&Table> = engine.tables.iter().filter(|t| t.created).collect();
    created.sort_by(|a, b| a.scope.cmp(&b.scope));
    for t in created {
        let sizes: Vec<usize> = t.scope.iter().map(|&v| engine.sizes[v]).collect();
        let mut kept = BTreeSet::new();
        crate::csp::for_each_tuple(&sizes, |tuple| {
            let raw: Vec<u32> = tuple.iter().map(|a| a.0).collect();
            if engine.allowed_tuple(&t.scope, &raw) {
                kept.insert(reindex(&t.scope, &raw));
            }
        });
        constraints.push(Constraint {
            scope: t.scope.iter().map(|&v| VarId(v as u32)).collect(),
            relation: Relation::Extensional(kept),
        });
    }
    Ok(KEnforcementResult {
        problem: Some(Problem::from_parts(problem.variables().to_vec(), domains, constraints)),
        removals,
    })
}

/// Scope sorted by variable index, with each tuple permuted to match.
fn sorted_tuples(c: &Constraint) -> (Vec<usize>, Vec<Vec<u32>>) {
    let mut order: Vec<usize> = (0..c.arity()).collect();
    order.sort_by_key(|&i| c.scope()[i]);
    let scope = order.iter().map(|&i| c.scope()[i].index()).collect();
    let Relation::Extensional(set) = c.relation() else { unreachable!() };
    let tuples = set.iter().map(|t| order.iter().map(|&i| t[i].0).collect()).collect();
    (scope, tuples)
}

/// True iff the problem induced by `t` survives strong k-consistency.
pub fn is_k_consistent_node(problem: &Problem, t: &PartialSolution, k: usize) -> Result<bool> {
    let induced = induce(problem, t)?;
    if induced.n() == 0 {
        return Ok(true);
    }
    let k = k.min(induced.n());
    Ok(!enforce_strong_k(&induced, k)?.is_empty())
}
