//! Relational operations on constraints and problems: consistency tests,
//! projection, selection and the induced problem of a partial solution.

use std::collections::BTreeSet;

use crate::csp::{Constraint, PartialSolution, Problem, Relation, Tuple, ValueId, VarId};
use crate::error::{CspError, Result};

/// True iff `t` does not cover the scope of `c`, or its restriction to the scope is allowed.
pub fn consistent_with(problem: &Problem, t: &PartialSolution, c: &Constraint) -> bool {
    let mut tuple = Vec::with_capacity(c.arity());
    for &v in c.scope() {
        match t.value_of(v) {
            Some(a) => tuple.push(a),
            None => return true,
        }
    }
    c.allows(problem.domains(), &tuple)
}

pub fn is_consistent(problem: &Problem, t: &PartialSolution) -> bool {
    let dense = t.to_dense(problem.n());
    problem.constraints().iter().all(|c| dense_consistent(problem, &dense, c))
}

fn dense_consistent(problem: &Problem, dense: &[Option<ValueId>], c: &Constraint) -> bool {
    let mut tuple = Vec::with_capacity(c.arity());
    for &v in c.scope() {
        match dense[v.index()] {
            Some(a) => tuple.push(a),
            None => return true,
        }
    }
    c.allows(problem.domains(), &tuple)
}

/// Projection of `c` onto `subset`. The result keeps the order of the original scope.
pub fn project(problem: &Problem, c: &Constraint, subset: &[VarId]) -> Result<Constraint> {
    if subset.is_empty() {
        return Err(CspError::Scope("projection onto the empty set".into()));
    }
    for v in subset {
        if !c.scope().contains(v) {
            return Err(CspError::Scope(format!(
                "`{}` is not in the constraint scope",
                problem.name(*v)
            )));
        }
    }
    let positions: Vec<usize> = (0..c.arity()).filter(|&i| subset.contains(&c.scope()[i])).collect();
    let relation: BTreeSet<Tuple> = c
        .materialize(problem.domains())
        .iter()
        .map(|t| positions.iter().map(|&i| t[i]).collect())
        .collect();
    Ok(Constraint {
        scope: positions.iter().map(|&i| c.scope()[i]).collect(),
        relation: Relation::Extensional(relation),
    })
}

/// Selection of the tuples of `c` that agree with `t`.
pub fn select(problem: &Problem, c: &Constraint, t: &PartialSolution) -> Result<Constraint> {
    let mut fixed = Vec::with_capacity(t.len());
    for &(v, a) in t.pairs() {
        let pos = c.position(v).ok_or_else(|| {
            CspError::Scope(format!("`{}` is not in the constraint scope", problem.name(v)))
        })?;
        fixed.push((pos, a));
    }
    let relation = c
        .materialize(problem.domains())
        .into_iter()
        .filter(|tuple| fixed.iter().all(|&(p, a)| tuple[p] == a))
        .collect();
    Ok(Constraint { scope: c.scope().to_vec(), relation: Relation::Extensional(relation) })
}

/// An induced problem together with where each part came from.
#[derive(Clone, Debug)]
pub struct Induced {
    pub problem: Problem,
    /// For each induced constraint, the index of the constraint it was derived from.
    pub sources: Vec<usize>,
    /// For each induced variable, the variable of the original problem.
    pub var_map: Vec<VarId>,
}

/// The problem induced by the consistent partial solution `t`.
pub fn induce(problem: &Problem, t: &PartialSolution) -> Result<Problem> {
    induce_with_sources(problem, t).map(|i| i.problem)
}

pub fn induce_with_sources(problem: &Problem, t: &PartialSolution) -> Result<Induced> {
    problem.check_partial(t)?;
    if !is_consistent(problem, t) {
        return Err(CspError::Precondition("the partial solution is inconsistent".into()));
    }
    let dense = t.to_dense(problem.n());
    let mut var_map = Vec::new();
    let mut new_id = vec![None; problem.n()];
    for v in problem.var_ids() {
        if dense[v.index()].is_none() {
            new_id[v.index()] = Some(VarId(var_map.len() as u32));
            var_map.push(v);
        }
    }
    let mut constraints = Vec::new();
    let mut sources = Vec::new();
    for (ci, c) in problem.constraints().iter().enumerate() {
        let free: Vec<usize> = (0..c.arity()).filter(|&i| dense[c.scope()[i].index()].is_none()).collect();
        if free.is_empty() {
            continue;
        }
        let scope: Vec<VarId> = free.iter().map(|&i| new_id[c.scope()[i].index()].unwrap()).collect();
        let relation = if free.len() == c.arity() {
            match c.relation() {
                Relation::Extensional(set) => Relation::Extensional(set.clone()),
                other => other.clone(),
            }
        } else {
            let fixed: Vec<(usize, ValueId)> = (0..c.arity())
                .filter_map(|i| dense[c.scope()[i].index()].map(|a| (i, a)))
                .collect();
            let set: BTreeSet<Tuple> = c
                .materialize(problem.domains())
                .iter()
                .filter(|tuple| fixed.iter().all(|&(p, a)| tuple[p] == a))
                .map(|tuple| free.iter().map(|&i| tuple[i]).collect())
                .collect();
            Relation::Extensional(set)
        };
        constraints.push(Constraint { scope, relation });
        sources.push(ci);
    }
    let variables = var_map.iter().map(|&v| problem.name(v).to_owned()).collect();
    let domains = var_map.iter().map(|&v| problem.domain(v).to_vec()).collect();
    Ok(Induced { problem: Problem::from_parts(variables, domains, constraints), sources, var_map })
}

/// Syntactic equality: same variables, domains and constraint list, relations compared as sets.
pub fn problems_equal(a: &Problem, b: &Problem) -> bool {
    if a.variables() != b.variables() || a.domains() != b.domains() || a.m() != b.m() {
        return false;
    }
    a.constraints().iter().zip(b.constraints()).all(|(ca, cb)| {
        let names_a = ca.scope().iter().map(|&v| a.name(v));
        let names_b = cb.scope().iter().map(|&v| b.name(v));
        if ca.arity() != cb.arity() || !names_a.eq(names_b) {
            return false;
        }
        match (ca.relation(), cb.relation()) {
            (Relation::Extensional(x), Relation::Extensional(y)) => x == y,
            (Relation::NotEqual, Relation::NotEqual) => true,
            (
                Relation::LetterEquality { pos_a: pa, pos_b: pb },
                Relation::LetterEquality { pos_a: qa, pos_b: qb },
            ) if pa == qa && pb == qb => true,
            _ => ca.materialize(a.domains()) == cb.materialize(b.domains()),
        }
    })
}

/// Every solution, in lexicographic order of (variable order, domain order), up to `limit`.
///
/// Independent reference enumeration: a depth-first sweep in variable-list order that
/// only prunes on constraints whose scope is fully assigned.
pub fn enumerate_solutions(problem: &Problem, limit: Option<usize>) -> Vec<PartialSolution> {
    let n = problem.n();
    let mut out = Vec::new();
    if limit == Some(0) || problem.domains().iter().any(Vec::is_empty) {
        return out;
    }
    // constraints become checkable once their last variable (by index) is assigned
    let mut closing: Vec<Vec<&Constraint>> = vec![Vec::new(); n];
    for c in problem.constraints() {
        let last = c.scope().iter().map(|v| v.index()).max().unwrap();
        closing[last].push(c);
    }
    let mut dense: Vec<Option<ValueId>> = vec![None; n];
    fn rec(
        problem: &Problem,
        closing: &[Vec<&Constraint>],
        dense: &mut Vec<Option<ValueId>>,
        i: usize,
        limit: Option<usize>,
        out: &mut Vec<PartialSolution>,
    ) -> bool {
        if i == dense.len() {
            out.push(
                dense.iter().enumerate().map(|(v, a)| (VarId(v as u32), a.unwrap())).collect(),
            );
            return limit.is_some_and(|l| out.len() >= l);
        }
        for a in 0..problem.domains()[i].len() {
            dense[i] = Some(ValueId(a as u32));
            if closing[i].iter().all(|c| dense_consistent(problem, dense, c))
                && rec(problem, closing, dense, i + 1, limit, out)
            {
                return true;
            }
        }
        dense[i] = None;
        false
    }
    rec(problem, &closing, &mut dense, 0, limit, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Value;

    fn coloring() -> Problem {
        let mut b = Problem::builder();
        let x1 = b.variable("x1", ["r", "g", "b"]).unwrap();
        let x2 = b.variable("x2", ["r", "g", "b"]).unwrap();
        let x3 = b.variable("x3", ["r", "g", "b"]).unwrap();
        let x4 = b.variable("x4", ["r"]).unwrap();
        for (x, y) in [(x1, x2), (x1, x3), (x2, x3), (x2, x4), (x3, x4)] {
            b.not_equal(x, y).unwrap();
        }
        b.build()
    }

    fn xy(rel: &[(i64, i64)]) -> (Problem, Constraint) {
        let mut b = Problem::builder();
        let x = b.variable("x", [1, 2, 3]).unwrap();
        let y = b.variable("y", [1, 2, 3]).unwrap();
        b.extensional(&[x, y], rel.iter().map(|&(a, c)| vec![a, c])).unwrap();
        let p = b.build();
        let c = p.constraints()[0].clone();
        (p, c)
    }

    fn values(p: &Problem, c: &Constraint) -> BTreeSet<Vec<Value>> {
        c.materialize(p.domains())
            .iter()
            .map(|t| t.iter().zip(c.scope()).map(|(a, v)| p.value(*v, *a).clone()).collect())
            .collect()
    }

    #[test]
    fn consistent_with_uncovered_and_covered_scopes() {
        let (p, c) = xy(&[(1, 2)]);
        assert!(consistent_with(&p, &PartialSolution::new(), &c));
        let t = p.assignment([("x", 1)]).unwrap();
        assert!(consistent_with(&p, &t, &c));
        let t = p.assignment([("x", 1), ("y", 1)]).unwrap();
        assert!(!consistent_with(&p, &t, &c));
    }

    #[test]
    fn coloring_partial_solution_is_consistent() {
        let p = coloring();
        let t = p.assignment([("x1", "g"), ("x2", "b")]).unwrap();
        assert!(consistent_with(&p, &t, &p.constraints()[0]));
        assert!(is_consistent(&p, &t));
        assert!(is_consistent(&p, &PartialSolution::new()));
    }

    #[test]
    fn projection_examples() {
        let (p, c) = xy(&[(1, 2), (1, 3)]);
        let x = p.var("x").unwrap();
        let pr = project(&p, &c, &[x]).unwrap();
        assert_eq!(pr.scope(), &[x]);
        assert_eq!(values(&p, &pr), BTreeSet::from([vec![Value::Int(1)]]));
        let id = project(&p, &c, c.scope()).unwrap();
        assert_eq!(id.materialize(p.domains()), c.materialize(p.domains()));

        let mut b = Problem::builder();
        let x = b.variable("x", [1, 2]).unwrap();
        let y = b.variable("y", [1, 2]).unwrap();
        let z = b.variable("z", [1, 2]).unwrap();
        b.extensional(&[x, y, z], vec![vec![1, 1, 2], vec![2, 1, 2]]).unwrap();
        let p = b.build();
        let c = &p.constraints()[0];
        // brute force: restrictions of each tuple onto (y, z), deduplicated
        let expected: BTreeSet<Vec<ValueId>> =
            c.materialize(p.domains()).iter().map(|t| vec![t[1], t[2]]).collect();
        assert_eq!(expected.len(), 1);
        let pr = project(&p, c, &[z, y]).unwrap();
        assert_eq!(pr.scope(), &[y, z]);
        assert_eq!(pr.materialize(p.domains()), expected);
        assert!(project(&p, c, &[]).is_err());
    }

    #[test]
    fn projection_outside_scope_is_an_error() {
        let mut b = Problem::builder();
        let x = b.variable("x", [1]).unwrap();
        let y = b.variable("y", [1]).unwrap();
        let z = b.variable("z", [1]).unwrap();
        b.extensional(&[x, y], vec![vec![1, 1]]).unwrap();
        let p = b.build();
        assert!(matches!(project(&p, &p.constraints()[0], &[z]), Err(CspError::Scope(_))));
    }

    #[test]
    fn selection_examples() {
        let (p, c) = xy(&[(1, 2), (2, 2)]);
        let s = select(&p, &c, &PartialSolution::new()).unwrap();
        assert_eq!(s.materialize(p.domains()), c.materialize(p.domains()));
        let t = p.assignment([("x", 1)]).unwrap();
        let s = select(&p, &c, &t).unwrap();
        assert_eq!(values(&p, &s), BTreeSet::from([vec![Value::Int(1), Value::Int(2)]]));
    }

    #[test]
    fn coloring_select_then_project_forbids_b() {
        let p = coloring();
        let x2 = p.var("x2").unwrap();
        let x3 = p.var("x3").unwrap();
        let c = &p.constraints()[2];
        let t = p.assignment([("x2", "b")]).unwrap();
        let unary = project(&p, &select(&p, c, &t).unwrap(), &[x3]).unwrap();
        assert_eq!(unary.scope(), &[x3]);
        assert_eq!(
            values(&p, &unary),
            BTreeSet::from([vec![Value::from("r")], vec![Value::from("g")]])
        );
        assert!(select(&p, &p.constraints()[0], &p.assignment([("x3", "r")]).unwrap()).is_err());
        let _ = x2;
    }

    #[test]
    fn induce_examples() {
        let p = coloring();
        assert!(problems_equal(&induce(&p, &PartialSolution::new()).unwrap(), &p));
        let t = p.assignment([("x1", "g"), ("x2", "b")]).unwrap();
        let q = induce(&p, &t).unwrap();
        assert_eq!(q.variables(), &["x3".to_string(), "x4".to_string()]);
        // x1!=x3 and x2!=x3 and x2!=x4 become unary; x3!=x4 stays binary
        assert_eq!(q.m(), 4);
        assert_eq!(q.constraints().iter().filter(|c| c.arity() == 1).count(), 3);
        let bad = p.assignment([("x1", "g"), ("x2", "g")]).unwrap();
        assert!(matches!(induce(&p, &bad), Err(CspError::Precondition(_))));
        let unknown = PartialSolution::from_pairs(vec![(VarId(9), ValueId(0))]);
        assert!(induce(&p, &unknown).is_err());
    }

    #[test]
    fn problems_equal_detects_a_deleted_tuple() {
        let (p, _) = xy(&[(1, 2), (2, 3)]);
        let (q, _) = xy(&[(1, 2)]);
        assert!(problems_equal(&p, &p));
        assert!(!problems_equal(&p, &q));
    }

    #[test]
    fn enumerate_examples() {
        let mut b = Problem::builder();
        let x = b.variable("x", ["a"]).unwrap();
        b.extensional(&[x], vec![vec!["a"]]).unwrap();
        let p = b.build();
        let sols = enumerate_solutions(&p, None);
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].render(&p), vec![("x".to_string(), "a".to_string())]);

        let mut b = Problem::builder();
        let vs: Vec<VarId> = (0..3).map(|i| b.variable(format!("x{i}"), [1, 2]).unwrap()).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                b.not_equal(vs[i], vs[j]).unwrap();
            }
        }
        assert!(enumerate_solutions(&b.build(), None).is_empty());

        // coloring: x4=r forces x2,x3 in {g,b} distinct, x1 the remaining one
        let sols = enumerate_solutions(&coloring(), None);
        assert_eq!(sols.len(), 2);
        assert_eq!(enumerate_solutions(&coloring(), Some(1)).len(), 1);
    }
}
