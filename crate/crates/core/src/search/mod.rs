//! The backtracking engine and its look-back bookkeeping.

mod config;
mod engine;
mod report;
mod state;

pub use config::{Lookahead, Lookback, Mode, SolverConfig};
pub use engine::{solve, solve_with, SolveOptions};
pub use report::{capture_trace, SearchReport, Status};
pub use state::{BackjumpEvent, Cause, JumpKind, SearchState};
