//! Iterative depth-first backtracking with pluggable look-ahead and look-back.
//!
//! Levels are 1-based: the variable instantiated at depth `i` sits at level `i`.
//! A node is counted the moment its assignment is made, whether or not it then
//! survives look-ahead; the root is not counted.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::consistency::{supported_everywhere, DomainState, KEngine, KOutcome, Propagator};
use crate::csp::{PartialSolution, Problem, ValueId, VarId};
use crate::error::Result;
use crate::heuristics::{select_variable, CbjTrace, SelectionContext, TreeNode};
use crate::levels::LevelSet;
use crate::network::{Kind, Network};
use crate::search::{BackjumpEvent, Cause, Lookahead, Lookback, Mode, SearchReport, SearchState, SolverConfig, Status};

/// Instrumentation switches.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Record every visited node.
    pub trace: bool,
    /// Record every look-back event.
    pub events: bool,
    /// Record the backtrack tree needed to build a perfect advisor.
    pub tree: bool,
    /// Assert that undoing a level restores the domains exactly.
    pub check_trail: bool,
    /// Assert arc consistency after every successful propagation.
    pub check_gac: bool,
}

/// Runs `config` on `problem`, optionally recording the visited nodes.
pub fn solve(problem: &Problem, config: &SolverConfig, trace: bool) -> Result<SearchReport> {
    solve_with(problem, config, &SolveOptions { trace, ..SolveOptions::default() })
}

pub fn solve_with(problem: &Problem, config: &SolverConfig, options: &SolveOptions) -> Result<SearchReport> {
    config.validate(problem)?;
    Engine::new(problem, config, options).run()
}

/// Domains left by strong k-consistency at one node, indexed by original variable.
#[derive(Debug)]
struct McState {
    present: Vec<Vec<bool>>,
    sizes: Vec<usize>,
    explanations: Vec<Vec<LevelSet>>,
}

#[derive(Debug)]
struct Frame {
    var: usize,
    values: Vec<u32>,
    next: usize,
    assigned: bool,
    mark: usize,
    fingerprint: u64,
    mc: Option<McState>,
    node: usize,
    last_wipe: Option<usize>,
}

struct Engine<'a> {
    problem: &'a Problem,
    config: &'a SolverConfig,
    options: &'a SolveOptions,
    net: Network,
    explain: bool,
    state: SearchState,
    frames: Vec<Frame>,
    path: PartialSolution,
    assign: Vec<Option<u32>>,
    levels: Vec<u32>,
    instantiated: Vec<bool>,
    dom: DomainState,
    prop: Propagator,
    root_mc: Option<McState>,
    scratch: Vec<u32>,
    // report
    nodes: u64,
    nodes_by_depth: Vec<u64>,
    checks: u64,
    histogram: BTreeMap<u32, u64>,
    solutions: Vec<PartialSolution>,
    trace: Option<Vec<PartialSolution>>,
    events: Option<Vec<BackjumpEvent>>,
    tree: Option<Vec<TreeNode>>,
    start: Instant,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a Problem, config: &'a SolverConfig, options: &'a SolveOptions) -> Self {
        let net = Network::new(problem);
        let n = net.n();
        let prop = Propagator::new(&net);
        Engine {
            problem,
            config,
            options,
            explain: config.lookback != Lookback::Chrono,
            state: SearchState::new(),
            frames: Vec::new(),
            path: PartialSolution::new(),
            assign: vec![None; n],
            levels: vec![0; n],
            instantiated: vec![false; n],
            dom: DomainState::from_sizes(&net.dom_sizes),
            prop,
            root_mc: None,
            scratch: Vec::new(),
            nodes: 0,
            nodes_by_depth: vec![0; n + 1],
            checks: 0,
            histogram: BTreeMap::new(),
            solutions: Vec::new(),
            trace: options.trace.then(Vec::new),
            events: options.events.then(Vec::new),
            tree: options.tree.then(|| vec![TreeNode::new(None, None, None)]),
            net,
            start: Instant::now(),
        }
    }

    fn run(mut self) -> Result<SearchReport> {
        let status = self.search()?;
        let complete = status == Status::Complete;
        Ok(SearchReport {
            status,
            solution_count: self.state.solutions,
            solutions: self.solutions,
            nodes: self.nodes,
            nodes_by_depth: self.nodes_by_depth,
            checks: self.checks + self.prop.checks,
            backjump_histogram: self.histogram,
            elapsed: self.start.elapsed(),
            trace: self.trace,
            events: self.events,
            tree: self.tree.map(|nodes| CbjTrace {
                nodes,
                mode: self.config.mode,
                complete,
                domain_sizes: self.net.dom_sizes.clone(),
            }),
        })
    }

    fn search(&mut self) -> Result<Status> {
        let n = self.net.n();
        if n == 0 {
            self.found_solution();
            return Ok(Status::Complete);
        }
        match self.config.lookahead {
            Lookahead::Bc => {}
            Lookahead::Gac => {
                if self.net.dom_sizes.contains(&0) {
                    return Ok(Status::Complete);
                }
                self.prop.seed_all(&self.net);
                if self.prop.run(&self.net, &mut self.dom, &self.levels, self.explain, None).is_some() {
                    return Ok(Status::Complete);
                }
                self.check_gac();
            }
            Lookahead::Mc(k) => match self.enforce_mc(k)? {
                Some(mc) => self.root_mc = Some(mc),
                None => return Ok(Status::Complete),
            },
        }
        self.push_frame()?;
        let time_limit = self.config.time_limit.unwrap_or(Duration::MAX);
        loop {
            let top = self.frames.len() - 1;
            let level = top as u32 + 1;
            self.unassign_top();
            let frame = &mut self.frames[top];
            if frame.next < frame.values.len() {
                if self.config.node_limit.is_some_and(|l| self.nodes >= l) {
                    return Ok(Status::NodeLimit);
                }
                if self.nodes.is_multiple_of(256) && self.start.elapsed() > time_limit {
                    return Ok(Status::TimeLimit);
                }
                let a = frame.values[frame.next];
                frame.next += 1;
                let var = frame.var;
                self.assign_value(top, var, a);
                if !self.lookahead(top, level, var, a)? {
                    if let Some(tree) = self.tree.as_mut() {
                        tree[self.frames[top].node].leaf = true;
                    }
                    continue;
                }
                if level as usize == n {
                    self.found_solution();
                    if self.config.mode == Mode::First {
                        return Ok(Status::Complete);
                    }
                    continue;
                }
                self.push_frame()?;
            } else if self.retreat(level) {
                return Ok(Status::Complete);
            }
        }
    }

    /// Handles the dead end at `level`; returns true when the search is over.
    fn retreat(&mut self, level: u32) -> bool {
        let cause = match self.frames[level as usize - 1].last_wipe {
            Some(w) => Cause::Wipeout(VarId(w as u32)),
            None => Cause::ValuesExhausted,
        };
        let mut event = self.state.lookback_destination(level, self.config.lookback, self.config.mode, cause);
        let dest = event.destination;
        *self.histogram.entry(event.level).or_insert(0) += 1;
        if let Some(tree) = self.tree.as_mut() {
            let source = if level >= 2 { self.frames[level as usize - 2].node } else { 0 };
            let revoked = if dest >= 1 { self.frames[dest as usize - 1].node } else { 0 };
            tree[revoked].revoker = Some(source);
        }
        self.state.record_incoming(&event);
        if let Some(events) = self.events.as_mut() {
            event.destination_node = Some(self.path.prefix(dest as usize));
            events.push(event);
        }
        if dest == 0 {
            return true;
        }
        while self.frames.len() > dest as usize {
            let frame = self.frames.pop().unwrap();
            if frame.assigned {
                self.unassign(frame.var);
            }
            self.restore(frame.mark, frame.fingerprint);
        }
        self.state.truncate(dest);
        false
    }

    fn found_solution(&mut self) {
        self.state.solutions += 1;
        if self.config.mode != Mode::Count {
            self.solutions.push(self.path.clone());
        }
        if let Some(tree) = self.tree.as_mut() {
            let leaf = self.frames.last().map_or(0, |f| f.node);
            tree[leaf].solution = !self.frames.is_empty();
            let mut id = Some(leaf);
            while let Some(i) = id {
                if tree[i].has_solution_below {
                    break;
                }
                tree[i].has_solution_below = true;
                id = tree[i].parent;
            }
        }
    }

    fn current_sizes(&self) -> &[usize] {
        match self.config.lookahead {
            Lookahead::Bc => &self.net.dom_sizes,
            Lookahead::Gac => self.dom.sizes(),
            Lookahead::Mc(_) => &self.current_mc().sizes,
        }
    }

    fn current_mc(&self) -> &McState {
        self.frames
            .last()
            .and_then(|f| f.mc.as_ref())
            .or(self.root_mc.as_ref())
            .expect("an enforced state exists at every accepted node")
    }

    fn push_frame(&mut self) -> Result<()> {
        let ctx = SelectionContext {
            assignment: &self.path,
            instantiated: &self.instantiated,
            sizes: self.current_sizes(),
            degree: &self.net.degree,
        };
        let var = select_variable(&ctx, &self.config.heuristic)?.index();
        let level = self.state.push_level();
        let mut pruned = LevelSet::new();
        let values: Vec<u32> = match self.config.lookahead {
            Lookahead::Bc => (0..self.net.dom_sizes[var] as u32).collect(),
            Lookahead::Gac => {
                if self.explain {
                    self.dom.pruned_explanation(var, &mut pruned);
                }
                self.dom.present_values(var).map(|a| a as u32).collect()
            }
            Lookahead::Mc(_) => {
                let mc = self.current_mc();
                if self.explain {
                    for (a, &p) in mc.present[var].iter().enumerate() {
                        if !p {
                            pruned.union_with(&mc.explanations[var][a]);
                        }
                    }
                }
                (0..mc.present[var].len() as u32).filter(|&a| mc.present[var][a as usize]).collect()
            }
        };
        self.state.add_conflict(level, &pruned);
        let parent = self.frames.last().map_or(0, |f| f.node);
        if let Some(tree) = self.tree.as_mut() {
            tree[parent].next_var = Some(VarId(var as u32));
        }
        let fingerprint = if self.options.check_trail { self.dom.fingerprint() } else { 0 };
        self.frames.push(Frame {
            var,
            values,
            next: 0,
            assigned: false,
            mark: self.dom.mark(),
            fingerprint,
            mc: None,
            node: parent,
            last_wipe: None,
        });
        Ok(())
    }

    fn assign_value(&mut self, top: usize, var: usize, a: u32) {
        let level = top as u32 + 1;
        self.path.push(VarId(var as u32), ValueId(a));
        self.assign[var] = Some(a);
        self.levels[var] = level;
        self.instantiated[var] = true;
        self.nodes += 1;
        self.nodes_by_depth[level as usize] += 1;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(self.path.clone());
        }
        let frame = &mut self.frames[top];
        frame.assigned = true;
        frame.last_wipe = None;
        if let Some(tree) = self.tree.as_mut() {
            let parent = if top == 0 { 0 } else { self.frames[top - 1].node };
            let id = tree.len();
            tree.push(TreeNode::new(Some(parent), Some(VarId(var as u32)), Some(ValueId(a))));
            tree[parent].children.push(id);
            self.frames[top].node = id;
        }
    }

    fn unassign(&mut self, var: usize) {
        self.path.pop();
        self.assign[var] = None;
        self.levels[var] = 0;
        self.instantiated[var] = false;
    }

    fn unassign_top(&mut self) {
        let top = self.frames.len() - 1;
        if !self.frames[top].assigned {
            return;
        }
        let frame = &mut self.frames[top];
        frame.assigned = false;
        frame.mc = None;
        let (var, mark, fp) = (frame.var, frame.mark, frame.fingerprint);
        self.unassign(var);
        self.restore(mark, fp);
    }

    fn restore(&mut self, mark: usize, fingerprint: u64) {
        if self.config.lookahead == Lookahead::Gac {
            self.dom.undo(mark);
            if self.options.check_trail {
                assert_eq!(self.dom.fingerprint(), fingerprint, "domain trail did not restore the level");
            }
        }
    }

    fn check_gac(&self) {
        if self.options.check_gac {
            let missing = supported_everywhere(self.problem, &self.dom);
            assert!(missing.is_empty(), "unsupported values after propagation: {missing:?}");
        }
    }

    /// Look-ahead after assigning `var = a` at `level`; on failure the reasons are
    /// added to the level's conflict set.
    fn lookahead(&mut self, top: usize, level: u32, var: usize, a: u32) -> Result<bool> {
        match self.config.lookahead {
            Lookahead::Bc => Ok(self.backward_check(level, var)),
            Lookahead::Gac => {
                self.dom.instantiate(VarId(var as u32), ValueId(a), level);
                self.prop.seed_var(&self.net, var);
                match self.prop.run(&self.net, &mut self.dom, &self.levels, self.explain, None) {
                    Some(wipe) => {
                        self.state.add_conflict(level, &wipe.explanation);
                        self.frames[top].last_wipe = Some(wipe.var);
                        Ok(false)
                    }
                    None => {
                        self.check_gac();
                        Ok(true)
                    }
                }
            }
            Lookahead::Mc(k) => {
                if !self.backward_check(level, var) {
                    return Ok(false);
                }
                match self.enforce_mc(k)? {
                    Some(mc) => {
                        self.frames[top].mc = Some(mc);
                        Ok(true)
                    }
                    None => Ok(false),
                }
            }
        }
    }

    /// Checks the constraints completed by `var`, shallowest partner first.
    fn backward_check(&mut self, level: u32, var: usize) -> bool {
        let mut order: Vec<(u32, usize)> = Vec::new();
        for &ci in &self.net.var_constraints[var] {
            let scope = &self.net.constraints[ci].scope;
            if scope.iter().all(|&v| self.assign[v].is_some()) {
                let key = scope.iter().filter(|&&v| v != var).map(|&v| self.levels[v]).max().unwrap_or(0);
                order.push((key, ci));
            }
        }
        order.sort_unstable();
        for (_, ci) in order {
            let c = &self.net.constraints[ci];
            self.scratch.clear();
            self.scratch.extend(c.scope.iter().map(|&v| self.assign[v].unwrap()));
            self.checks += 1;
            if !c.allows(&self.scratch) {
                for &v in &c.scope {
                    if v != var {
                        self.state.add_conflict_level(level, self.levels[v]);
                    }
                }
                return false;
            }
        }
        true
    }

    /// Strong k-consistency on the problem induced by the current assignment.
    /// `None` means EMPTY; its explanation has been added to the current level.
    fn enforce_mc(&mut self, k: usize) -> Result<Option<McState>> {
        let n = self.net.n();
        let mut index = vec![usize::MAX; n];
        let mut free = Vec::new();
        for (v, slot) in index.iter_mut().enumerate() {
            if self.assign[v].is_none() {
                *slot = free.len();
                free.push(v);
            }
        }
        let sizes: Vec<usize> = free.iter().map(|&v| self.net.dom_sizes[v]).collect();
        let mut engine = KEngine::new(sizes, k, self.explain, false);
        for c in &self.net.constraints {
            let Kind::Table { tuples, .. } = &c.kind else {
                unreachable!("validated: mc runs on extensional problems only")
            };
            let mut open: Vec<usize> = (0..c.scope.len()).filter(|&q| self.assign[c.scope[q]].is_none()).collect();
            if open.is_empty() || (open.len() > k && open.len() > 1) {
                continue;
            }
            open.sort_by_key(|&q| c.scope[q]);
            let mut base = LevelSet::new();
            for &v in &c.scope {
                if self.levels[v] > 0 {
                    base.insert(self.levels[v]);
                }
            }
            let projected: Vec<Vec<u32>> = tuples
                .iter()
                .filter(|t| c.scope.iter().enumerate().all(|(q, &v)| self.assign[v].is_none_or(|a| a == t[q])))
                .map(|t| open.iter().map(|&q| t[q]).collect())
                .collect();
            let scope: Vec<usize> = open.iter().map(|&q| index[c.scope[q]]).collect();
            engine.add(&scope, &projected, &base)?;
        }
        let outcome = engine.run()?;
        self.checks += engine.checks;
        match outcome {
            KOutcome::Empty { explanation, .. } => {
                let level = self.frames.len() as u32;
                if level > 0 {
                    self.state.add_conflict(level, &explanation);
                }
                Ok(None)
            }
            KOutcome::Consistent => {
                let mut present = vec![Vec::new(); n];
                let mut sizes = vec![0; n];
                let mut explanations = vec![Vec::new(); n];
                for (i, &v) in free.iter().enumerate() {
                    present[v] = (0..self.net.dom_sizes[v]).map(|a| engine.has(i, a)).collect();
                    sizes[v] = engine.size(i);
                    if self.explain {
                        explanations[v] =
                            (0..self.net.dom_sizes[v]).map(|a| engine.value_explanation(i, a).clone()).collect();
                    }
                }
                if !self.explain {
                    for &v in &free {
                        explanations[v] = vec![LevelSet::new(); self.net.dom_sizes[v]];
                    }
                }
                Ok(Some(McState { present, sizes, explanations }))
            }
        }
    }
}
