//! Variable ordering: fail-first heuristics and the perfect-ordering advisor.

mod advisor;
mod select;

pub use advisor::{build_perfect_advisor, CbjTrace, PerfectAdvisor, TreeNode};
pub use select::{select_variable, HeuristicSpec, SelectionContext};
