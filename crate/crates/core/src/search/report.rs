use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::csp::{PartialSolution, Problem};
use crate::error::{CspError, Result};
use crate::heuristics::CbjTrace;
use crate::search::BackjumpEvent;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Complete,
    NodeLimit,
    TimeLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Complete => "COMPLETE",
            Status::NodeLimit => "NODE_LIMIT",
            Status::TimeLimit => "TIME_LIMIT",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub status: Status,
    pub solution_count: u64,
    /// Solutions found in FIRST and ALL modes, in discovery order.
    pub solutions: Vec<PartialSolution>,
    /// Nodes visited, the root excluded.
    pub nodes: u64,
    /// `nodes_by_depth[d]` counts visited nodes at depth `d`; index 0 is unused.
    pub nodes_by_depth: Vec<u64>,
    pub checks: u64,
    /// Count of retreats by backjump level.
    pub backjump_histogram: BTreeMap<u32, u64>,
    pub elapsed: Duration,
    pub trace: Option<Vec<PartialSolution>>,
    pub events: Option<Vec<BackjumpEvent>>,
    pub tree: Option<CbjTrace>,
}

impl SearchReport {
    pub fn backjumps_total(&self) -> u64 {
        self.backjump_histogram.values().sum()
    }

    pub fn to_json(&self, problem: &Problem) -> Json {
        let mut out = json!({
            "status": self.status,
            "solutions": self.solution_count,
            "nodes": self.nodes,
            "checks": self.checks,
            "backjump_histogram": self.backjump_histogram.iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect::<serde_json::Map<_, _>>(),
            "elapsed_ms": self.elapsed.as_secs_f64() * 1000.0,
        });
        if !self.solutions.is_empty() {
            out["assignments"] = self.solutions.iter().map(|s| json!(s.render(problem))).collect();
        }
        if let Some(trace) = &self.trace {
            out["trace"] = trace.iter().map(|t| json!(t.render(problem))).collect();
        }
        out
    }
}

/// The ordered list of visited nodes.
pub fn capture_trace(report: &SearchReport) -> Result<&[PartialSolution]> {
    report.trace.as_deref().ok_or_else(|| CspError::Unavailable("the node trace (run with tracing on)".into()))
}
