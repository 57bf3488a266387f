//! Seeded instance families: random binary CSPs, pigeon-hole composites and crosswords.

pub mod crossword;
mod pigeonhole;
mod random;
mod rng;

pub use crossword::{build_crossword, parse_grid, Grid, Orientation, Slot};
pub use pigeonhole::{gen_pigeonhole, Variant};
pub use random::{gen_random, RandomModelParams};
pub use rng::Rng;
