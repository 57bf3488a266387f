#![allow(dead_code)]

use std::collections::HashSet;

use csp_lab::generators::{gen_pigeonhole, gen_random, RandomModelParams, Rng, Variant};
use csp_lab::heuristics::HeuristicSpec;
use csp_lab::search::{solve_with, SolveOptions};
use csp_lab::{Lookahead, Lookback, Mode, PartialSolution, Problem, SearchReport, SolverConfig};

/// Parameters of a small random instance, drawn from `seed`.
pub fn small_params(seed: u64, max_n: usize, max_d: usize, max_m: usize) -> RandomModelParams {
    let mut rng = Rng::new(seed ^ 0x5eed_0000_0000_0000);
    let n = 3 + rng.below((max_n - 2) as u64) as usize;
    let d = 2 + rng.below((max_d - 1) as u64) as usize;
    let pairs = n * (n - 1) / 2;
    let m = 1 + rng.below(pairs.min(max_m) as u64) as usize;
    let t = 1 + rng.below((d * d) as u64) as usize;
    RandomModelParams { n, d, r: 2, m, t, seed }
}

pub fn small_random(seed: u64) -> Problem {
    gen_random(&small_params(seed, 8, 4, 12)).unwrap()
}

pub fn lookaheads() -> Vec<Lookahead> {
    vec![Lookahead::Bc, Lookahead::Mc(1), Lookahead::Mc(2), Lookahead::Mc(3), Lookahead::Gac]
}

pub fn lookbacks() -> Vec<Lookback> {
    vec![Lookback::Chrono, Lookback::Bj(1), Lookback::Bj(2), Lookback::Bj(3), Lookback::Cbj]
}

pub fn heuristics() -> Vec<HeuristicSpec> {
    vec![HeuristicSpec::Lex, HeuristicSpec::Dom, HeuristicSpec::DomPlusDeg, HeuristicSpec::DomDivDeg]
}

pub fn traced(problem: &Problem, la: Lookahead, lb: Lookback, mode: Mode) -> SearchReport {
    let config = SolverConfig::new(la, lb).with_mode(mode);
    let options = SolveOptions { trace: true, ..SolveOptions::default() };
    solve_with(problem, &config, &options).unwrap()
}

pub fn node_set(report: &SearchReport) -> HashSet<PartialSolution> {
    report.trace.as_ref().unwrap().iter().cloned().collect()
}

/// First node of `a` missing from `b`, if any.
pub fn not_included(a: &SearchReport, b: &SearchReport) -> Option<PartialSolution> {
    let b = node_set(b);
    a.trace.as_ref().unwrap().iter().find(|t| !b.contains(t)).cloned()
}

pub fn pigeonhole_instances() -> Vec<(Problem, Vec<csp_lab::VarId>)> {
    let mut out = Vec::new();
    for n in 2..=5 {
        for k in 1..=2usize {
            if k < n {
                for v in [Variant::A, Variant::B] {
                    out.push(gen_pigeonhole(n, k, v).unwrap());
                }
            }
        }
    }
    out
}
