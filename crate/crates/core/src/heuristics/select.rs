use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::csp::{PartialSolution, Problem, VarId};
use crate::error::{CspError, Result};
use crate::heuristics::PerfectAdvisor;

#[derive(Clone, Debug)]
pub enum HeuristicSpec {
    /// Variables in problem order.
    Lex,
    /// A fixed permutation of all variables.
    Given(Vec<VarId>),
    /// Smallest current domain.
    Dom,
    /// Smallest current domain, ties to the largest static degree.
    DomPlusDeg,
    /// Smallest ratio of current domain size to static degree.
    DomDivDeg,
    Advisor(Arc<PerfectAdvisor>),
}

impl HeuristicSpec {
    /// Validates a static order against `problem`.
    pub fn given(problem: &Problem, order: Vec<VarId>) -> Result<Self> {
        let mut seen = vec![false; problem.n()];
        for &v in &order {
            if v.index() >= problem.n() || std::mem::replace(&mut seen[v.index()], true) {
                return Err(CspError::Parameter(format!("order is not a permutation at {v}")));
            }
        }
        if order.len() != problem.n() {
            return Err(CspError::Parameter("order must list every variable".into()));
        }
        Ok(HeuristicSpec::Given(order))
    }

    pub fn given_names<S: AsRef<str>>(problem: &Problem, names: &[S]) -> Result<Self> {
        let order = names
            .iter()
            .map(|n| problem.var(n.as_ref()).ok_or_else(|| CspError::UnknownVariable(n.as_ref().to_owned())))
            .collect::<Result<Vec<_>>>()?;
        Self::given(problem, order)
    }

    /// Parses the file-free tokens `lex`, `dom`, `dom+deg` and `dom/deg`.
    pub fn from_token(token: &str) -> Result<Self> {
        match token {
            "lex" => Ok(HeuristicSpec::Lex),
            "dom" => Ok(HeuristicSpec::Dom),
            "dom+deg" => Ok(HeuristicSpec::DomPlusDeg),
            "dom/deg" => Ok(HeuristicSpec::DomDivDeg),
            other => Err(CspError::Parse(format!("unknown heuristic `{other}`"))),
        }
    }
}

impl fmt::Display for HeuristicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeuristicSpec::Lex => "lex",
            HeuristicSpec::Given(_) => "given",
            HeuristicSpec::Dom => "dom",
            HeuristicSpec::DomPlusDeg => "dom+deg",
            HeuristicSpec::DomDivDeg => "dom/deg",
            HeuristicSpec::Advisor(_) => "advisor",
        })
    }
}

/// What a heuristic may look at.
pub struct SelectionContext<'a> {
    pub assignment: &'a PartialSolution,
    pub instantiated: &'a [bool],
    /// Current domain sizes, indexed by variable.
    pub sizes: &'a [usize],
    /// Static degrees, indexed by variable.
    pub degree: &'a [usize],
}

/// Picks the next variable to instantiate. Residual ties go to the smallest index.
pub fn select_variable(ctx: &SelectionContext, spec: &HeuristicSpec) -> Result<VarId> {
    let mut free = (0..ctx.instantiated.len()).filter(|&v| !ctx.instantiated[v]);
    let pick = match spec {
        HeuristicSpec::Lex => free.next(),
        HeuristicSpec::Given(order) => order.iter().map(|v| v.index()).find(|&v| !ctx.instantiated[v]),
        HeuristicSpec::Dom => free.min_by_key(|&v| ctx.sizes[v]),
        HeuristicSpec::DomPlusDeg => {
            free.min_by(|&a, &b| ctx.sizes[a].cmp(&ctx.sizes[b]).then(ctx.degree[b].cmp(&ctx.degree[a])))
        }
        HeuristicSpec::DomDivDeg => free.min_by(|&a, &b| ratio_cmp(ctx, a, b)),
        HeuristicSpec::Advisor(adv) => {
            let v = adv.advise(ctx.assignment)?;
            if ctx.instantiated.get(v.index()).copied().unwrap_or(true) {
                return Err(CspError::Coverage(format!("advisor named an assigned variable {v}")));
            }
            Some(v.index())
        }
    };
    // min_by keeps the first minimum, so equal keys resolve to the smaller index
    pick.map(|v| VarId(v as u32))
        .ok_or_else(|| CspError::Precondition("every variable is instantiated".into()))
}

/// Compares size/degree exactly; degree zero ranks as infinitely large ratio.
fn ratio_cmp(ctx: &SelectionContext, a: usize, b: usize) -> Ordering {
    let (sa, da) = (ctx.sizes[a] as u128, ctx.degree[a] as u128);
    let (sb, db) = (ctx.sizes[b] as u128, ctx.degree[b] as u128);
    match (da, db) {
        (0, 0) => sa.cmp(&sb),
        (0, _) => Ordering::Greater,
        (_, 0) => Ordering::Less,
        _ => (sa * db).cmp(&(sb * da)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pick(sizes: &[usize], degree: &[usize], spec: &HeuristicSpec) -> u32 {
        let inst = vec![false; sizes.len()];
        let t = PartialSolution::new();
        let ctx = SelectionContext { assignment: &t, instantiated: &inst, sizes, degree };
        select_variable(&ctx, spec).unwrap().0
    }

    #[test]
    fn fail_first_variants() {
        let (sizes, degree) = ([2, 2, 3], [1, 3, 4]);
        assert_eq!(pick(&sizes, &degree, &HeuristicSpec::DomPlusDeg), 1);
        assert_eq!(pick(&sizes, &degree, &HeuristicSpec::DomDivDeg), 1);
        assert_eq!(pick(&sizes, &degree, &HeuristicSpec::Dom), 0);
        assert_eq!(pick(&[3, 3, 3], &[2, 2, 2], &HeuristicSpec::DomDivDeg), 0);
        assert_eq!(pick(&[3, 3, 3], &[2, 2, 2], &HeuristicSpec::DomPlusDeg), 0);
        assert_eq!(pick(&[1, 5], &[0, 1], &HeuristicSpec::DomDivDeg), 1);
    }

    #[test]
    fn given_skips_instantiated() {
        let inst = [false, true, false];
        let t = PartialSolution::new();
        let ctx = SelectionContext { assignment: &t, instantiated: &inst, sizes: &[1, 1, 1], degree: &[1, 1, 1] };
        let spec = HeuristicSpec::Given(vec![VarId(1), VarId(2), VarId(0)]);
        assert_eq!(select_variable(&ctx, &spec).unwrap(), VarId(2));
    }
}
