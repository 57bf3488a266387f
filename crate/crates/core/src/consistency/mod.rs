//! Local consistency: generalized arc consistency and strong k-consistency.

mod domains;
mod gac;
mod strong_k;

pub use domains::DomainState;
pub use gac::{enforce_gac, revise, supported_everywhere, PruneResult, Removal};
pub(crate) use gac::Propagator;
pub use strong_k::{enforce_strong_k, is_k_consistent_node, KEnforcementResult, KRemoval};
pub(crate) use strong_k::{KEngine, KOutcome};
