use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::csp::{Problem, Tuple, ValueId, VarId};
use crate::error::{CspError, Result};
use crate::generators::Rng;

const MAX_CANDIDATES: u128 = 50_000_000;

/// The `(n, d, r, m, t)` random model. `t` counts the ALLOWED tuples per constraint.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomModelParams {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub m: usize,
    pub t: usize,
    pub seed: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Variables `x1..xn` over `0..d`; `m` distinct scopes of `r` variables and, for each,
/// `t` distinct allowed tuples, all drawn uniformly without replacement.
///
/// Scopes are drawn from the lexicographic list of `r`-subsets and emitted sorted;
/// tuples are drawn from the lexicographic list of the `d^r` candidates.
pub fn gen_random(p: &RandomModelParams) -> Result<Problem> {
    let bad = |msg: String| Err(CspError::Parameter(msg));
    if p.n == 0 || p.d == 0 || p.r == 0 || p.r > p.n {
        return bad(format!("need n, d >= 1 and 1 <= r <= n, got {p:?}"));
    }
    let scopes_total = binomial(p.n, p.r);
    let tuples_total = (p.d as u128).checked_pow(p.r as u32).unwrap_or(u128::MAX);
    if p.m as u128 > scopes_total {
        return bad(format!("m = {} exceeds the {scopes_total} possible scopes", p.m));
    }
    if p.t == 0 || p.t as u128 > tuples_total {
        return bad(format!("t = {} must lie in 1..={tuples_total}", p.t));
    }
    if scopes_total > MAX_CANDIDATES || tuples_total > MAX_CANDIDATES {
        return bad("parameters are too large to sample".into());
    }
    let mut rng = Rng::new(p.seed);
    let mut all_scopes = Vec::with_capacity(scopes_total as usize);
    let mut c: Vec<usize> = (0..p.r).collect();
    loop {
        all_scopes.push(c.clone());
        let mut i = p.r;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if c[i] < p.n - p.r + i {
                c[i] += 1;
                for j in i + 1..p.r {
                    c[j] = c[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    let mut chosen: Vec<Vec<usize>> = rng.sample(all_scopes.len(), p.m).into_iter().map(|i| all_scopes[i].clone()).collect();
    chosen.sort();

    let mut b = Problem::builder();
    for i in 1..=p.n {
        b.variable(format!("x{i}"), 0..p.d as i64)?;
    }
    for scope in chosen {
        let picks = rng.sample(tuples_total as usize, p.t);
        let tuples: BTreeSet<Tuple> = picks.into_iter().map(|code| decode(code, p.d, p.r)).collect();
        let scope: Vec<VarId> = scope.into_iter().map(|v| VarId(v as u32)).collect();
        b.extensional_ids(&scope, tuples)?;
    }
    Ok(b.build())
}

/// Base-`d` digits of `code`, most significant first.
fn decode(mut code: usize, d: usize, r: usize) -> Tuple {
    let mut t = vec![ValueId(0); r];
    for slot in t.iter_mut().rev() {
        *slot = ValueId((code % d) as u32);
        code /= d;
    }
    t
}
