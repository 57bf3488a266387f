mod common;

use common::*;
use csp_lab::csp::enumerate_solutions;
use csp_lab::search::{solve_with, SolveOptions};
use csp_lab::{Mode, SolverConfig, Status};

#[test]
fn every_configuration_counts_like_the_oracle() {
    for seed in 0..60 {
        let p = small_random(seed);
        let expected = enumerate_solutions(&p, None).len() as u64;
        for la in lookaheads() {
            for lb in lookbacks() {
                for h in heuristics() {
                    let config = SolverConfig::new(la, lb).with_heuristic(h);
                    let options = SolveOptions { check_trail: true, check_gac: true, ..SolveOptions::default() };
                    let r = solve_with(&p, &config, &options).unwrap();
                    assert_eq!(r.status, Status::Complete);
                    assert_eq!(r.solution_count, expected, "seed {seed} config {}", config.id());
                }
            }
        }
    }
}

#[test]
fn all_mode_returns_the_oracle_solutions() {
    for seed in 100..130 {
        let p = small_random(seed);
        let mut expected = enumerate_solutions(&p, None);
        expected.sort_by_key(|s| s.as_set());
        for la in lookaheads() {
            for lb in lookbacks() {
                let r = solve_with(&p, &SolverConfig::new(la, lb).with_mode(Mode::All), &SolveOptions::default()).unwrap();
                let mut got: Vec<_> = r.solutions.iter().map(|s| s.as_set()).collect();
                got.sort();
                let want: Vec<_> = expected.iter().map(|s| s.as_set()).collect();
                assert_eq!(got, want, "seed {seed} {la}+{lb}");
            }
        }
    }
}
