//! The ten acceptance criteria. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test -p csp-lab --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use csp_lab::consistency::{enforce_gac, is_k_consistent_node, supported_everywhere, DomainState};
use csp_lab::csp::{enumerate_solutions, induce, is_consistent, problems_equal, Relation};
use csp_lab::generators::crossword::{self, FIGURE7_GRID};
use csp_lab::generators::{gen_pigeonhole, gen_random, RandomModelParams, Rng, Variant};
use csp_lab::harness::{calibrate, CalibrationParams};
use csp_lab::heuristics::{build_perfect_advisor, HeuristicSpec};
use csp_lab::search::{solve_with, Cause, SolveOptions};
use csp_lab::{
    CspError, Lookahead, Lookback, Mode, PartialSolution, Problem, SearchReport, SolverConfig, Status,
};

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {n:>2} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn run(p: &Problem, config: &SolverConfig, options: &SolveOptions) -> SearchReport {
    solve_with(p, config, options).unwrap()
}

#[test]
fn c01_oracle_equivalence() {
    let start = Instant::now();
    let mut runs = 0u64;
    let mut mismatches = Vec::new();
    for seed in 0..500 {
        let p = small_random(seed);
        let expected = enumerate_solutions(&p, None).len() as u64;
        for la in lookaheads() {
            for lb in lookbacks() {
                for h in heuristics() {
                    let config = SolverConfig::new(la, lb).with_heuristic(h);
                    let r = run(&p, &config, &SolveOptions::default());
                    runs += 1;
                    if r.status != Status::Complete || r.solution_count != expected {
                        mismatches.push(format!("seed {seed} {}: {} vs {expected}", config.id(), r.solution_count));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("{runs} runs, {} mismatches {:?}, {:.1}s", mismatches.len(), mismatches.first(), elapsed.as_secs_f64());
    verdict(1, "oracle equivalence", mismatches.is_empty() && elapsed < Duration::from_secs(300), &detail);
}

/// Pairs (A, B) whose traces must satisfy A ⊆ B.
fn inclusion_pairs() -> Vec<((Lookahead, Lookback), (Lookahead, Lookback))> {
    use Lookahead::{Bc, Mc};
    use Lookback::{Bj, Cbj, Chrono};
    let mut pairs = vec![((Bc, Cbj), (Bc, Chrono))];
    for k in 1..=3u32 {
        let ku = k as usize;
        pairs.push(((Bc, Bj(k + 1)), (Bc, Bj(k))));
        pairs.push(((Mc(ku + 1), Chrono), (Mc(ku), Chrono)));
        pairs.push(((Mc(ku), Chrono), (Bc, Bj(k))));
        pairs.push(((Mc(ku), Cbj), (Mc(ku), Chrono)));
    }
    pairs
}

fn inclusion_failures(p: &Problem, order: &HeuristicSpec, label: &str, failures: &mut Vec<String>) -> u64 {
    let mut checked = 0;
    let options = SolveOptions { trace: true, ..SolveOptions::default() };
    for mode in [Mode::First, Mode::All] {
        let traced = |la, lb| {
            let config = SolverConfig::new(la, lb).with_mode(mode).with_heuristic(order.clone());
            run(p, &config, &options)
        };
        for ((la_a, lb_a), (la_b, lb_b)) in inclusion_pairs() {
            let a = traced(la_a, lb_a);
            let b = traced(la_b, lb_b);
            checked += 1;
            if let Some(t) = not_included(&a, &b) {
                failures.push(format!("{label} {mode}: {la_a}+{lb_a} visits {t:?} outside {la_b}+{lb_b}"));
            }
        }
    }
    checked
}

#[test]
fn c02_inclusion_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..200 {
        let p = gen_random(&small_params(seed, 8, 3, 12)).unwrap();
        checked += inclusion_failures(&p, &HeuristicSpec::Lex, &format!("seed {seed}"), &mut failures);
    }
    for (p, order) in pigeonhole_instances() {
        checked += inclusion_failures(&p, &HeuristicSpec::Lex, "pigeonhole lex", &mut failures);
        let given = HeuristicSpec::given(&p, order).unwrap();
        checked += inclusion_failures(&p, &given, "pigeonhole given", &mut failures);
    }
    let elapsed = start.elapsed();
    let detail = format!("{checked} inclusions, {} failures {:?}, {:.1}s", failures.len(), failures.first(), elapsed.as_secs_f64());
    verdict(2, "Figure-6 inclusions", failures.is_empty() && elapsed < Duration::from_secs(600), &detail);
}

#[test]
fn c03_perfect_advisor() {
    let mut violations = Vec::new();
    let mut coverage = 0;
    let (mut bt_total, mut cbj_total) = (0, 0);
    for seed in 0..100 {
        let p = small_random(seed);
        for mode in [Mode::First, Mode::All] {
            let cbj_config = SolverConfig::new(Lookahead::Bc, Lookback::Cbj).with_mode(mode);
            let cbj = run(&p, &cbj_config, &SolveOptions { tree: true, ..SolveOptions::default() });
            let advisor = build_perfect_advisor(cbj.tree.as_ref().unwrap()).unwrap();
            let bt_config = SolverConfig::new(Lookahead::Bc, Lookback::Chrono)
                .with_mode(mode)
                .with_heuristic(HeuristicSpec::Advisor(Arc::new(advisor)));
            match solve_with(&p, &bt_config, &SolveOptions::default()) {
                Ok(bt) => {
                    bt_total += bt.nodes;
                    cbj_total += cbj.nodes;
                    if bt.nodes > cbj.nodes || bt.solution_count != cbj.solution_count {
                        violations.push(format!("seed {seed} {mode}: {} > {}", bt.nodes, cbj.nodes));
                    }
                }
                Err(CspError::Coverage(_)) => coverage += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    let detail = format!(
        "{} violations {:?}, {coverage} coverage errors, nodes BT {bt_total} vs CBJ {cbj_total}",
        violations.len(),
        violations.first()
    );
    verdict(3, "perfect advisor", violations.is_empty() && coverage == 0, &detail);
}

fn given_run(p: &Problem, order: &[csp_lab::VarId], la: Lookahead, lb: Lookback, events: bool) -> SearchReport {
    let config = SolverConfig::new(la, lb)
        .with_mode(Mode::First)
        .with_heuristic(HeuristicSpec::given(p, order.to_vec()).unwrap());
    run(p, &config, &SolveOptions { events, ..SolveOptions::default() })
}

#[test]
fn c04_example5_separation() {
    let start = Instant::now();
    let (p, order) = gen_pigeonhole(6, 2, Variant::A).unwrap();
    let mc2 = given_run(&p, &order, Lookahead::Mc(2), Lookback::Chrono, false);
    let cbj = given_run(&p, &order, Lookahead::Bc, Lookback::Cbj, false);
    let mc2_cbj = given_run(&p, &order, Lookahead::Mc(2), Lookback::Cbj, true);
    let depth5 = mc2.nodes_by_depth[5];
    let events = mc2_cbj.events.as_ref().unwrap();
    let one_level = events.iter().all(|e| e.destination + 1 == e.from);
    let detail = format!(
        "MC_2 nodes at depth 5 = {depth5} (want 360; by depth {:?}), CBJ {} vs MC_2 {}, \
         MC_2-CBJ {} events all one level: {one_level}, {:.2}s",
        &mc2.nodes_by_depth[1..],
        cbj.nodes,
        mc2.nodes,
        events.len(),
        start.elapsed().as_secs_f64()
    );
    let pass = depth5 == 360 && cbj.nodes * 10 < mc2.nodes && one_level && start.elapsed() < Duration::from_secs(60);
    verdict(4, "Example 5 separation", pass, &detail);
}

#[test]
fn c05_example6_reversal() {
    let start = Instant::now();
    let (p, order) = gen_pigeonhole(5, 2, Variant::B).unwrap();
    let mc1 = given_run(&p, &order, Lookahead::Mc(1), Lookback::Chrono, false);
    let cbj = given_run(&p, &order, Lookahead::Bc, Lookback::Cbj, false);
    let detail = format!("MC_1 {} vs CBJ {} nodes, {:.2}s", mc1.nodes, cbj.nodes, start.elapsed().as_secs_f64());
    let pass = mc1.nodes * 10 < cbj.nodes && start.elapsed() < Duration::from_secs(60);
    verdict(5, "Example 6 reversal", pass, &detail);
}

fn figure7() -> Problem {
    let grid = crossword::parse_grid(FIGURE7_GRID).unwrap();
    crossword::build_crossword(&grid, &crossword::test_dictionary()).unwrap()
}

#[test]
fn c06_crossword_model() {
    let p = figure7();
    let letters = p.constraints().iter().filter(|c| matches!(c.relation(), Relation::LetterEquality { .. })).count();
    let ne = p.constraints().iter().filter(|c| matches!(c.relation(), Relation::NotEqual)).count();
    let config = SolverConfig::new(Lookahead::Gac, Lookback::Cbj)
        .with_heuristic(HeuristicSpec::DomDivDeg)
        .with_mode(Mode::First)
        .with_node_limit(1_000_000);
    let r = run(&p, &config, &SolveOptions::default());
    let solution_ok = r.solutions.iter().all(|s| s.len() == p.n() && is_consistent(&p, s));
    let words: Vec<_> = r.solutions.first().map(|s| s.render(&p)).unwrap_or_default();
    let detail = format!(
        "{} variables, {letters} letter, {ne} not-equal; {} after {} nodes, {} solution(s) {words:?}",
        p.n(),
        r.status,
        r.nodes,
        r.solution_count
    );
    let pass = p.n() == 10 && letters == 21 && ne == 13 && r.status == Status::Complete && solution_ok;
    verdict(6, "crossword model", pass, &detail);
}

/// None when the fixpoint holds, else what went wrong.
fn gac_fixpoint_problem(p: &Problem) -> Option<String> {
    let mut dom = DomainState::new(p);
    let first = enforce_gac(p, &mut dom, &PartialSolution::new(), false);
    if first.wipeout {
        return None;
    }
    let missing = supported_everywhere(p, &dom);
    if !missing.is_empty() {
        return Some(format!("{} unsupported values", missing.len()));
    }
    let second = enforce_gac(p, &mut dom, &PartialSolution::new(), false);
    (!second.removals.is_empty()).then(|| format!("second pass removed {}", second.removals.len()))
}

#[test]
fn c07_gac_fixpoint() {
    let mut failures = Vec::new();
    let mut wiped = 0;
    let mut instances: Vec<(String, Problem)> = (0..200).map(|s| (format!("seed {s}"), small_random(10_000 + s))).collect();
    instances.push(("figure7".into(), figure7()));
    for (label, p) in &instances {
        if enforce_gac(p, &mut DomainState::new(p), &PartialSolution::new(), false).wipeout {
            wiped += 1;
        }
        if let Some(e) = gac_fixpoint_problem(p) {
            failures.push(format!("{label}: {e}"));
        }
    }
    let detail = format!("{} instances ({wiped} wiped out), {} failures {:?}", instances.len(), failures.len(), failures.first());
    verdict(7, "GAC fixpoint", failures.is_empty(), &detail);
}

/// A consistent assignment built by trying random values in a random order.
fn random_consistent(p: &Problem, rng: &mut Rng) -> PartialSolution {
    let n = p.n();
    let order = rng.sample(n, n);
    let mut t = PartialSolution::new();
    for v in order {
        let var = csp_lab::VarId(v as u32);
        let d = p.domain(var).len();
        for a in rng.sample(d, d) {
            t.push(var, csp_lab::ValueId(a as u32));
            if is_consistent(p, &t) {
                break;
            }
            t.pop();
        }
    }
    t
}

#[test]
fn c08_induction_composes() {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut seed = 0;
    while checked < 100 {
        seed += 1;
        let p = small_random(20_000 + seed);
        let mut rng = Rng::new(seed);
        let full = random_consistent(&p, &mut rng);
        if full.len() < 2 {
            continue;
        }
        let len = 2 + rng.below(full.len() as u64 - 1) as usize;
        let t = full.prefix(len);
        // t' is a random proper subset of t, possibly empty.
        let keep = rng.below(len as u64) as usize;
        let chosen = rng.sample(len, keep);
        let t_prime: PartialSolution = chosen.iter().map(|&i| t.pairs()[i]).collect();
        let direct = induce(&p, &t).unwrap();
        let inner = induce(&p, &t_prime).unwrap();
        let rest = t.without(&t_prime).translate(&p, &inner).unwrap();
        let composed = induce(&inner, &rest).unwrap();
        checked += 1;
        if !problems_equal(&direct, &composed) {
            failures.push(format!("seed {seed}"));
        }
    }
    verdict(8, "induction composes", failures.is_empty(), &format!("{checked} triples, failures {failures:?}"));
}

fn min_time(p: &Problem, config: &SolverConfig, repeats: usize) -> (SearchReport, Duration) {
    let mut best = Duration::MAX;
    let mut report = None;
    for _ in 0..repeats {
        let r = run(p, config, &SolveOptions::default());
        best = best.min(r.elapsed);
        report = Some(r);
    }
    (report.unwrap(), best)
}

#[test]
fn c09_gac_cbj_dominates_gac() {
    let start = Instant::now();
    let calibration = calibrate(&CalibrationParams::new(50, 10, 2, 95)).unwrap();
    let t = calibration.t;
    let mut node_failures = Vec::new();
    let mut time_failures = Vec::new();
    let (mut sat, mut worst) = (0, 0.0f64);
    for seed in 0..20 {
        let p = gen_random(&RandomModelParams { n: 50, d: 10, r: 2, m: 95, t, seed: 1000 + seed }).unwrap();
        let gac = SolverConfig::new(Lookahead::Gac, Lookback::Chrono).with_mode(Mode::First);
        let cbj = SolverConfig::new(Lookahead::Gac, Lookback::Cbj).with_mode(Mode::First);
        let (rg, tg) = min_time(&p, &gac, 5);
        let (rc, tc) = min_time(&p, &cbj, 5);
        assert_eq!((rg.status, rc.status), (Status::Complete, Status::Complete));
        sat += (rg.solution_count > 0) as u32;
        if rc.nodes > rg.nodes {
            node_failures.push(format!("seed {seed}: {} > {}", rc.nodes, rg.nodes));
        }
        let ratio = tc.as_secs_f64() / tg.as_secs_f64();
        worst = worst.max(ratio);
        if ratio > 2.0 {
            time_failures.push(format!("seed {seed}: {tc:?} vs {tg:?}"));
        }
    }
    let detail = format!(
        "t* = {t} (soluble {:.2}), {sat}/20 soluble, node failures {node_failures:?}, \
         worst time ratio {worst:.2} {time_failures:?}, {:.1}s",
        calibration.sat_fraction,
        start.elapsed().as_secs_f64()
    );
    let pass = node_failures.is_empty() && time_failures.is_empty() && start.elapsed() < Duration::from_secs(900);
    verdict(9, "GAC-CBJ node dominance", pass, &detail);
}

#[test]
fn c10_backjump_destinations_are_inconsistent() {
    let mut checked = 0;
    let mut failures = Vec::new();
    for seed in 0..50 {
        let p = gen_random(&small_params(30_000 + seed, 6, 4, 12)).unwrap();
        for mode in [Mode::First, Mode::All] {
            let config = SolverConfig::new(Lookahead::Bc, Lookback::Cbj).with_mode(mode);
            let r = run(&p, &config, &SolveOptions { events: true, ..SolveOptions::default() });
            for e in r.events.unwrap() {
                if e.cause == Cause::SolutionsFound || e.level > 3 {
                    continue;
                }
                let node = e.destination_node.as_ref().unwrap();
                checked += 1;
                if is_k_consistent_node(&p, node, e.level as usize).unwrap() {
                    failures.push(format!("seed {seed} {mode}: {e:?}"));
                }
            }
        }
    }
    let detail = format!("{checked} backjumps checked, {} failures {:?}", failures.len(), failures.first());
    verdict(10, "backjump destinations", failures.is_empty() && checked > 0, &detail);
}
