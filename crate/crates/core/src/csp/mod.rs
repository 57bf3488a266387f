//! Problem representation and relational algebra.

mod algebra;
pub mod io;
mod problem;
mod value;

pub use algebra::{
    consistent_with, enumerate_solutions, induce, induce_with_sources, is_consistent,
    problems_equal, project, select, Induced,
};
pub(crate) use problem::for_each_tuple;
pub use problem::{
    Constraint, PartialSolution, Problem, ProblemBuilder, Relation, Tuple, ValueId, VarId,
};
pub use value::Value;
