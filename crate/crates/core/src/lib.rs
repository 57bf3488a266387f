//! A constraint-satisfaction laboratory.
//!
//! Backtracking search with pluggable look-ahead (backward checking, strong
//! k-consistency, generalized arc consistency) and look-back (chronological,
//! level-capped backjumping, conflict-directed backjumping), seeded instance
//! generators, and a harness that compares the algorithms by search-tree size.

pub mod consistency;
pub mod csp;
pub mod error;
pub mod generators;
pub mod harness;
pub mod heuristics;
pub mod levels;
pub(crate) mod network;
pub mod search;

pub use csp::{PartialSolution, Problem, Value, ValueId, VarId};
pub use error::{CspError, Result};
pub use heuristics::HeuristicSpec;
pub use levels::LevelSet;
pub use search::{solve, Lookahead, Lookback, Mode, SearchReport, SolveOptions, SolverConfig, Status};
