//! An ordering for plain backtracking that never visits more nodes than a
//! recorded conflict-directed backjumping run.
//!
//! The construction walks the backjumping tree. A node whose subtree holds a
//! solution is followed as is: backtracking picks the variable backjumping picked
//! next. A node whose subtree is insoluble was eventually revoked by a backjump
//! out of some dead-end deeper down; backtracking jumps straight to the dead-end
//! variable instead, skipping everything in between, and recurses into its values.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::csp::{PartialSolution, ValueId, VarId};
use crate::error::{CspError, Result};
use crate::search::Mode;

/// One node of a recorded search tree. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub var: Option<VarId>,
    pub value: Option<ValueId>,
    pub children: Vec<usize>,
    /// The variable chosen below this node, if search went deeper.
    pub next_var: Option<VarId>,
    /// The assignment was rejected by look-ahead.
    pub leaf: bool,
    pub solution: bool,
    pub has_solution_below: bool,
    /// The dead-end node whose backjump revoked this node's assignment: its
    /// children are the exhausted values. For the root, the final dead-end.
    pub revoker: Option<usize>,
}

impl TreeNode {
    pub(crate) fn new(parent: Option<usize>, var: Option<VarId>, value: Option<ValueId>) -> Self {
        TreeNode {
            parent,
            var,
            value,
            children: Vec::new(),
            next_var: None,
            leaf: false,
            solution: false,
            has_solution_below: false,
            revoker: None,
        }
    }
}

/// The backtrack tree of a conflict-directed backjumping run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbjTrace {
    pub nodes: Vec<TreeNode>,
    pub mode: Mode,
    pub complete: bool,
    pub domain_sizes: Vec<usize>,
}

impl CbjTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CspError::Parse(e.to_string()))
    }
}

/// Next-variable decisions keyed by the full assignment path.
#[derive(Clone, Debug, Default)]
pub struct PerfectAdvisor {
    decisions: HashMap<Vec<(VarId, ValueId)>, VarId>,
    mode: Option<Mode>,
}

impl PerfectAdvisor {
    pub fn advise(&self, path: &PartialSolution) -> Result<VarId> {
        self.decisions.get(path.pairs()).copied().ok_or_else(|| {
            let rendered: Vec<String> = path.pairs().iter().map(|(v, a)| format!("{v}={}", a.0)).collect();
            CspError::Coverage(format!("[{}]", rendered.join(", ")))
        })
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn mode(&self) -> Option<Mode> {
        self.mode
    }
}

pub fn build_perfect_advisor(trace: &CbjTrace) -> Result<PerfectAdvisor> {
    if !trace.complete {
        return Err(CspError::Precondition("the trace is incomplete".into()));
    }
    let mut advisor = PerfectAdvisor { decisions: HashMap::new(), mode: Some(trace.mode) };
    let mut stack: Vec<(usize, Vec<(VarId, ValueId)>)> = vec![(0, Vec::new())];
    while let Some((c, path)) = stack.pop() {
        let node = &trace.nodes[c];
        if node.solution {
            continue;
        }
        let source = if node.has_solution_below {
            c
        } else {
            node.revoker.ok_or_else(|| CspError::Precondition(format!("node {c} has no revoker")))?
        };
        let children = &trace.nodes[source].children;
        let var = trace.nodes[source]
            .next_var
            .ok_or_else(|| CspError::Precondition(format!("node {source} never chose a variable")))?;
        if !node.has_solution_below && children.len() != trace.domain_sizes[var.index()] {
            return Err(CspError::Precondition(format!(
                "dead end at node {source} does not cover the domain of {var}"
            )));
        }
        advisor.decisions.insert(path.clone(), var);
        for &ch in children.iter().rev() {
            let child = &trace.nodes[ch];
            if !child.leaf {
                let mut next = path.clone();
                next.push((var, child.value.expect("child nodes carry a value")));
                stack.push((ch, next));
            }
        }
    }
    Ok(advisor)
}
