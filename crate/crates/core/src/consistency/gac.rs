use std::collections::VecDeque;

use crate::consistency::DomainState;
use crate::csp::{PartialSolution, Problem, ValueId, VarId};
use crate::levels::LevelSet;
use crate::network::{Kind, Network};

/// One eliminated value and the levels responsible for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub var: VarId,
    pub value: ValueId,
    pub constraint: usize,
    pub explanation: LevelSet,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneResult {
    pub wipeout: bool,
    pub wiped: Option<VarId>,
    pub removals: Vec<Removal>,
    pub checks: u64,
}

#[derive(Clone, Debug)]
pub(crate) struct Wipeout {
    pub var: usize,
    pub explanation: LevelSet,
}

/// AC3-style propagation over a compiled network, reusable across search nodes.
#[derive(Debug)]
pub(crate) struct Propagator {
    queue: VecDeque<(u32, u32)>,
    queued: Vec<Vec<bool>>,
    pub checks: u64,
}

impl Propagator {
    pub fn new(net: &Network) -> Self {
        Propagator {
            queue: VecDeque::new(),
            queued: net.constraints.iter().map(|c| vec![false; c.scope.len()]).collect(),
            checks: 0,
        }
    }

    fn push(&mut self, c: usize, p: usize) {
        if !self.queued[c][p] {
            self.queued[c][p] = true;
            self.queue.push_back((c as u32, p as u32));
        }
    }

    pub fn seed_all(&mut self, net: &Network) {
        for (ci, c) in net.constraints.iter().enumerate() {
            for p in 0..c.scope.len() {
                self.push(ci, p);
            }
        }
    }

    /// Queues every arc that may lose support after `x` shrank.
    pub fn seed_var(&mut self, net: &Network, x: usize) {
        for &ci in &net.var_constraints[x] {
            for (p, &y) in net.constraints[ci].scope.iter().enumerate() {
                if y != x {
                    self.push(ci, p);
                }
            }
        }
    }

    fn clear(&mut self) {
        while let Some((c, p)) = self.queue.pop_front() {
            self.queued[c as usize][p as usize] = false;
        }
    }

    /// Runs to fixpoint or wipeout. `levels[v]` is the search level of `v`, 0 if free.
    pub fn run(
        &mut self,
        net: &Network,
        dom: &mut DomainState,
        levels: &[u32],
        explain: bool,
        mut log: Option<&mut Vec<Removal>>,
    ) -> Option<Wipeout> {
        let mut removed = Vec::new();
        while let Some((c, p)) = self.queue.pop_front() {
            let (c, p) = (c as usize, p as usize);
            self.queued[c][p] = false;
            removed.clear();
            revise_compiled(net, c, p, dom, levels, explain, &mut self.checks, &mut removed);
            if removed.is_empty() {
                continue;
            }
            let x = net.constraints[c].scope[p];
            if let Some(log) = log.as_deref_mut() {
                log.extend(removed.iter().map(|&a| Removal {
                    var: VarId(x as u32),
                    value: ValueId(a as u32),
                    constraint: c,
                    explanation: dom.removed_explanation(x, a).clone(),
                }));
            }
            if dom.size_of(x) == 0 {
                self.clear();
                let mut explanation = LevelSet::new();
                dom.pruned_explanation(x, &mut explanation);
                return Some(Wipeout { var: x, explanation });
            }
            self.seed_var(net, x);
        }
        None
    }
}

/// Removes unsupported values of the variable at position `p` of constraint `c`.
#[allow(clippy::too_many_arguments)]
fn revise_compiled(
    net: &Network,
    c: usize,
    p: usize,
    dom: &mut DomainState,
    levels: &[u32],
    explain: bool,
    checks: &mut u64,
    removed: &mut Vec<usize>,
) {
    let con = &net.constraints[c];
    let x = con.scope[p];
    let values: Vec<usize> = dom.present_values(x).collect();
    match &con.kind {
        Kind::Table { tuples, supports, .. } => {
            for a in values {
                let supported = supports[p][a].iter().any(|&ti| {
                    *checks += 1;
                    let t = &tuples[ti as usize];
                    con.scope.iter().enumerate().all(|(q, &y)| q == p || dom.has(y, t[q] as usize))
                });
                if !supported {
                    let mut e = LevelSet::new();
                    if explain {
                        instantiated_levels(&con.scope, levels, &mut e);
                        for &ti in &supports[p][a] {
                            let t = &tuples[ti as usize];
                            for (q, &y) in con.scope.iter().enumerate() {
                                if q != p && !dom.has(y, t[q] as usize) {
                                    e.union_with(dom.removed_explanation(y, t[q] as usize));
                                }
                            }
                        }
                    }
                    dom.remove_raw(x, a, Some(c), e);
                    removed.push(a);
                }
            }
        }
        Kind::NotEqual { same } => {
            let y = con.scope[1 - p];
            for a in values {
                let twin = same[p][a].map(|b| b as usize);
                let mut supported = false;
                for b in dom.present_values(y) {
                    *checks += 1;
                    if Some(b) != twin {
                        supported = true;
                        break;
                    }
                }
                if !supported {
                    let mut e = LevelSet::new();
                    if explain {
                        instantiated_levels(&con.scope, levels, &mut e);
                        for b in 0..net.dom_sizes[y] {
                            if Some(b) != twin && !dom.has(y, b) {
                                e.union_with(dom.removed_explanation(y, b));
                            }
                        }
                    }
                    dom.remove_raw(x, a, Some(c), e);
                    removed.push(a);
                }
            }
        }
        Kind::Letter { letters } => {
            let q = 1 - p;
            let y = con.scope[q];
            let mut mask = 0u64;
            for b in dom.present_values(y) {
                if let Some(l) = letters[q][b] {
                    mask |= 1 << (l % 64);
                }
            }
            for a in values {
                *checks += 1;
                let supported = letters[p][a].is_some_and(|l| mask & (1 << (l % 64)) != 0);
                if !supported {
                    let mut e = LevelSet::new();
                    if explain {
                        instantiated_levels(&con.scope, levels, &mut e);
                        if let Some(l) = letters[p][a] {
                            for (b, &lb) in letters[q].iter().enumerate().take(net.dom_sizes[y]) {
                                if lb == Some(l) && !dom.has(y, b) {
                                    e.union_with(dom.removed_explanation(y, b));
                                }
                            }
                        }
                    }
                    dom.remove_raw(x, a, Some(c), e);
                    removed.push(a);
                }
            }
        }
    }
}

fn instantiated_levels(scope: &[usize], levels: &[u32], into: &mut LevelSet) {
    for &v in scope {
        if levels[v] > 0 {
            into.insert(levels[v]);
        }
    }
}

/// Removes from the domain of `x` every value without a support in constraint `c`.
pub fn revise(problem: &Problem, c: usize, x: VarId, domains: &mut DomainState) -> Vec<ValueId> {
    let net = Network::new(problem);
    let p = net.constraints[c].position(x.index()).expect("variable must be in the constraint's scope");
    let mut removed = Vec::new();
    let mut checks = 0;
    let levels = vec![0; net.n()];
    revise_compiled(&net, c, p, domains, &levels, false, &mut checks, &mut removed);
    removed.into_iter().map(|a| ValueId(a as u32)).collect()
}

/// Enforces generalized arc consistency on `domains`.
///
/// The variables of `instantiation` are taken to sit at levels 1, 2, ... in order; with
/// `explain`, every removal carries the set of levels that caused it.
pub fn enforce_gac(
    problem: &Problem,
    domains: &mut DomainState,
    instantiation: &PartialSolution,
    explain: bool,
) -> PruneResult {
    let net = Network::new(problem);
    let mut levels = vec![0; net.n()];
    for (i, &(v, _)) in instantiation.pairs().iter().enumerate() {
        levels[v.index()] = i as u32 + 1;
    }
    let mut prop = Propagator::new(&net);
    let mut removals = Vec::new();
    if let Some(x) = (0..net.n()).find(|&x| domains.size_of(x) == 0) {
        return PruneResult { wipeout: true, wiped: Some(VarId(x as u32)), removals, checks: 0 };
    }
    prop.seed_all(&net);
    let wipe = prop.run(&net, domains, &levels, explain, Some(&mut removals));
    PruneResult {
        wipeout: wipe.is_some(),
        wiped: wipe.map(|w| VarId(w.var as u32)),
        removals,
        checks: prop.checks,
    }
}

/// Exhaustive support scan: every (constraint, variable, value) left without a support
/// in the current domains. Empty means the domains are arc consistent.
pub fn supported_everywhere(problem: &Problem, domains: &DomainState) -> Vec<(usize, VarId, ValueId)> {
    let mut missing = Vec::new();
    for (ci, c) in problem.constraints().iter().enumerate() {
        let current: Vec<Vec<ValueId>> = c.scope().iter().map(|&v| domains.values(v)).collect();
        for (p, &x) in c.scope().iter().enumerate() {
            for &a in &current[p] {
                let mut choice = current.clone();
                choice[p] = vec![a];
                if !any_allowed(problem, c, &choice) {
                    missing.push((ci, x, a));
                }
            }
        }
    }
    missing
}

fn any_allowed(problem: &Problem, c: &crate::csp::Constraint, choice: &[Vec<ValueId>]) -> bool {
    if choice.iter().any(Vec::is_empty) {
        return false;
    }
    let mut idx = vec![0usize; choice.len()];
    let mut tuple: Vec<ValueId> = choice.iter().map(|v| v[0]).collect();
    loop {
        if c.allows(problem.domains(), &tuple) {
            return true;
        }
        let mut i = choice.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < choice[i].len() {
                tuple[i] = choice[i][idx[i]];
                break;
            }
            idx[i] = 0;
            tuple[i] = choice[i][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn revise_table_removes_unsupported() {
        let mut b = Problem::builder();
        let x = b.variable("x", [1, 2]).unwrap();
        let y = b.variable("y", [1, 2]).unwrap();
        b.extensional(&[x, y], vec![vec![1, 2]]).unwrap();
        let p = b.build();
        let mut d = DomainState::new(&p);
        assert_eq!(revise(&p, 0, x, &mut d), vec![ValueId(1)]);
        assert_eq!(revise(&p, 0, y, &mut d), vec![ValueId(0)]);
        assert!(revise(&p, 0, x, &mut d).is_empty());
    }

    #[test]
    fn not_equal_on_singletons_wipes_out() {
        let mut b = Problem::builder();
        let x = b.variable("x", [1]).unwrap();
        let y = b.variable("y", [1]).unwrap();
        b.not_equal(x, y).unwrap();
        let p = b.build();
        let mut d = DomainState::new(&p);
        assert_eq!(revise(&p, 0, y, &mut d), vec![ValueId(0)]);
        assert_eq!(d.size(y), 0);
        let r = enforce_gac(&p, &mut DomainState::new(&p), &PartialSolution::new(), true);
        assert!(r.wipeout);
    }

    #[test]
    fn explanations_name_the_instantiated_level() {
        // x in {1,2,3}, y in {1,2,3}, x < y as a table
        let mut b = Problem::builder();
        let x = b.variable("x", [1, 2, 3]).unwrap();
        let y = b.variable("y", [1, 2, 3]).unwrap();
        let z = b.variable("z", [1, 2, 3]).unwrap();
        b.extensional(&[x, y], vec![vec![1, 2], vec![1, 3], vec![2, 3]]).unwrap();
        b.extensional(&[y, z], vec![vec![2, 3], vec![3, 1]]).unwrap();
        let p = b.build();
        let mut d = DomainState::new(&p);
        let r = enforce_gac(&p, &mut d, &PartialSolution::new(), true);
        assert!(!r.wipeout);
        assert!(r.removals.iter().all(|rm| rm.explanation.is_empty()));
        let t = p.assignment([("x", 2)]).unwrap();
        d.instantiate(x, ValueId(1), 1);
        let r = enforce_gac(&p, &mut d, &t, true);
        assert!(!r.wipeout);
        assert_eq!(d.values(y), vec![ValueId(2)]);
        assert_eq!(d.values(z), vec![ValueId(0)]);
        assert_eq!(d.explanation(z, ValueId(2)), Some(&LevelSet::singleton(1)));
        assert!(supported_everywhere(&p, &d).is_empty());
    }
}
