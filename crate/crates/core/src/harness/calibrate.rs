//! Finds the tightness at which about half of the random instances are insoluble.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{CspError, Result};
use crate::generators::{gen_random, RandomModelParams};
use crate::heuristics::HeuristicSpec;
use crate::search::{solve, Lookahead, Lookback, Mode, SolverConfig, Status};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub m: usize,
    /// Instances per probed `t`, seeded `seed..seed + samples`.
    pub samples: u64,
    pub seed: u64,
    /// Wanted fraction of soluble instances.
    pub target_sat: f64,
    pub node_limit: u64,
    pub time_limit: Duration,
}

impl CalibrationParams {
    pub fn new(n: usize, d: usize, r: usize, m: usize) -> Self {
        CalibrationParams {
            n,
            d,
            r,
            m,
            samples: 100,
            seed: 0,
            target_sat: 0.5,
            node_limit: 10_000_000,
            time_limit: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    /// The probed `t` whose soluble fraction is closest to the target; the
    /// larger `t` wins a tie.
    pub t: usize,
    pub sat_fraction: f64,
    /// Every probed `t` with its soluble fraction and number of unresolved runs.
    pub probes: BTreeMap<usize, (f64, u64)>,
}

/// Soluble fraction at `t` and the number of runs that hit a limit. Unresolved
/// runs count as insoluble.
fn probe(p: &CalibrationParams, t: usize) -> Result<(f64, u64)> {
    let config = SolverConfig::new(Lookahead::Gac, Lookback::Chrono)
        .with_heuristic(HeuristicSpec::DomDivDeg)
        .with_mode(Mode::First)
        .with_node_limit(p.node_limit)
        .with_time_limit(p.time_limit);
    let (mut sat, mut open) = (0u64, 0u64);
    for i in 0..p.samples {
        let problem = gen_random(&RandomModelParams { n: p.n, d: p.d, r: p.r, m: p.m, t, seed: p.seed + i })?;
        let report = solve(&problem, &config, false)?;
        match report.status {
            Status::Complete if report.solution_count > 0 => sat += 1,
            Status::Complete => {}
            _ => open += 1,
        }
    }
    Ok((sat as f64 / p.samples as f64, open))
}

/// Bisects `t` over `1..=d^r`, relying on solubility growing with `t`.
pub fn calibrate(p: &CalibrationParams) -> Result<Calibration> {
    if p.samples == 0 || !(0.0..=1.0).contains(&p.target_sat) {
        return Err(CspError::Parameter("calibration needs samples >= 1 and a target in [0, 1]".into()));
    }
    let max_t = p.d.checked_pow(p.r as u32).ok_or_else(|| CspError::Parameter("d^r overflows".into()))?;
    let mut probes = BTreeMap::new();
    let at = |t: usize, probes: &mut BTreeMap<usize, (f64, u64)>| -> Result<f64> {
        if let Some(&(f, _)) = probes.get(&t) {
            return Ok(f);
        }
        let r = probe(p, t)?;
        log::info!("calibrate t={t}: soluble {:.2} ({} unresolved)", r.0, r.1);
        probes.insert(t, r);
        Ok(r.0)
    };
    let (mut lo, mut hi) = (1, max_t);
    if at(lo, &mut probes)? < p.target_sat && at(hi, &mut probes)? >= p.target_sat {
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if at(mid, &mut probes)? >= p.target_sat {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        at(hi, &mut probes)?;
    }
    let (t, &(sat_fraction, _)) = probes
        .iter()
        .min_by(|a, b| {
            let da = (a.1 .0 - p.target_sat).abs();
            let db = (b.1 .0 - p.target_sat).abs();
            da.total_cmp(&db).then(b.0.cmp(a.0))
        })
        .expect("at least one probe ran");
    Ok(Calibration { t: *t, sat_fraction, probes })
}
