//! Search-tree inclusion between two configurations.

use std::collections::HashSet;

use serde::Serialize;

use crate::csp::{PartialSolution, Problem};
use crate::error::{CspError, Result};
use crate::heuristics::HeuristicSpec;
use crate::search::{solve_with, SearchReport, SolveOptions, SolverConfig};

pub const MAX_WITNESSES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dominance {
    /// Every node visited by A is visited by B.
    pub subset: bool,
    /// Up to ten nodes visited by A but not by B, in A's visiting order.
    pub witnesses: Vec<PartialSolution>,
    pub nodes_a: u64,
    pub nodes_b: u64,
}

/// Compares two traced reports.
pub fn dominance_from_reports(a: &SearchReport, b: &SearchReport) -> Result<Dominance> {
    let missing = || CspError::Precondition("both runs need a node trace".into());
    let ta = a.trace.as_ref().ok_or_else(missing)?;
    let tb: HashSet<&PartialSolution> = b.trace.as_ref().ok_or_else(missing)?.iter().collect();
    let mut witnesses = Vec::new();
    let mut subset = true;
    for t in ta {
        if !tb.contains(t) {
            subset = false;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(t.clone());
            } else {
                break;
            }
        }
    }
    Ok(Dominance { subset, witnesses, nodes_a: a.nodes, nodes_b: b.nodes })
}

/// Runs `a` and `b` under the same static `order` and checks trace(A) ⊆ trace(B).
/// The configurations' own heuristics are replaced by `order`.
pub fn compare_dominance(
    problem: &Problem,
    a: &SolverConfig,
    b: &SolverConfig,
    order: &HeuristicSpec,
) -> Result<Dominance> {
    if !matches!(order, HeuristicSpec::Lex | HeuristicSpec::Given(_)) {
        return Err(CspError::Precondition(format!("dominance needs a static order, got {order}")));
    }
    let options = SolveOptions { trace: true, ..SolveOptions::default() };
    let ra = solve_with(problem, &a.clone().with_heuristic(order.clone()), &options)?;
    let rb = solve_with(problem, &b.clone().with_heuristic(order.clone()), &options)?;
    dominance_from_reports(&ra, &rb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_pigeonhole, Variant};
    use crate::search::{Lookahead, Lookback, Mode};

    #[test]
    fn reflexive_and_cbj_inside_bt() {
        let (p, order) = gen_pigeonhole(4, 2, Variant::A).unwrap();
        let order = HeuristicSpec::given(&p, order).unwrap();
        let cbj = SolverConfig::new(Lookahead::Bc, Lookback::Cbj).with_mode(Mode::First);
        let bt = SolverConfig::new(Lookahead::Bc, Lookback::Chrono).with_mode(Mode::First);
        assert!(compare_dominance(&p, &cbj, &cbj, &order).unwrap().subset);
        let d = compare_dominance(&p, &cbj, &bt, &order).unwrap();
        assert!(d.subset && d.nodes_a < d.nodes_b);
        let back = compare_dominance(&p, &bt, &cbj, &order).unwrap();
        assert!(!back.subset);
        assert_eq!(back.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn dynamic_orders_are_refused() {
        let (p, _) = gen_pigeonhole(3, 1, Variant::A).unwrap();
        let c = SolverConfig::new(Lookahead::Bc, Lookback::Cbj);
        assert!(compare_dominance(&p, &c, &c, &HeuristicSpec::Dom).is_err());
    }

    #[test]
    fn missing_trace_is_a_precondition_error() {
        let (p, _) = gen_pigeonhole(3, 1, Variant::A).unwrap();
        let c = SolverConfig::new(Lookahead::Bc, Lookback::Cbj);
        let r = solve_with(&p, &c, &SolveOptions::default()).unwrap();
        assert!(matches!(dominance_from_reports(&r, &r), Err(CspError::Precondition(_))));
    }
}
