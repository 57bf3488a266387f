use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::csp::{Problem, Tuple, ValueId, VarId};
use crate::error::{CspError, Result};

/// Which static ordering to pair with the composite.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `x1..x(n-k+1), y1..y(k+1), x(n-k+2)..x(n+1)`
    A,
    /// `y1..yk, x1..x(n+1), y(k+1)`
    B,
}

/// Two independent pigeon-hole problems: `n + 1` pairwise different `x`s over
/// `1..=n` and `k + 1` pairwise different `y`s over `1..=k`. Both variants build the
/// same problem; only the returned ordering differs.
pub fn gen_pigeonhole(n: usize, k: usize, variant: Variant) -> Result<(Problem, Vec<VarId>)> {
    if k == 0 || k >= n {
        return Err(CspError::Parameter(format!("need 1 <= k < n, got n = {n}, k = {k}")));
    }
    let mut b = Problem::builder();
    let xs: Vec<VarId> = (1..=n + 1).map(|i| b.variable(format!("x{i}"), 1..=n as i64)).collect::<Result<_>>()?;
    let ys: Vec<VarId> = (1..=k + 1).map(|i| b.variable(format!("y{i}"), 1..=k as i64)).collect::<Result<_>>()?;
    for (group, d) in [(&xs, n), (&ys, k)] {
        let ne: BTreeSet<Tuple> = (0..d as u32)
            .flat_map(|a| (0..d as u32).filter(move |&c| c != a).map(move |c| vec![ValueId(a), ValueId(c)]))
            .collect();
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                b.extensional_ids(&[group[i], group[j]], ne.clone())?;
            }
        }
    }
    let order = match variant {
        Variant::A => xs[..n - k + 1].iter().chain(&ys).chain(&xs[n - k + 1..]).copied().collect(),
        Variant::B => ys[..k].iter().chain(&xs).chain(&ys[k..]).copied().collect(),
    };
    Ok((b.build(), order))
}
