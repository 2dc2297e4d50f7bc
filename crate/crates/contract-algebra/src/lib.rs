//! Assume-guarantee contracts over trace predicates.
//!
//! Contracts are extensional: an assumption and a guarantee are whole-trace
//! predicates, and the algebra (saturation, composition, quotient,
//! refinement) is decided semantically by exhaustive enumeration over
//! declared finite trace universes rather than by formula manipulation. That
//! keeps the operations honest at desk scale: every law asserted here is
//! checked pointwise on every trace of the universe.

mod contract;
mod universe;

pub use contract::{compose2, compose_n, quotient, refines, satisfies, saturate, Contract};
pub use universe::TraceUniverse;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("contract `{0}` must be saturated first (call saturate)")]
    Unsaturated(String),
    #[error("contract list must be non-empty")]
    EmptyComposition,
    #[error(
        "trace universe too large: {signals} signals x {horizon} ticks = {bits} bits exceeds \
         the {max_bits}-bit enumeration bound"
    )]
    UniverseTooLarge {
        signals: usize,
        horizon: usize,
        bits: u32,
        max_bits: u32,
    },
    #[error("predicate evaluation failed: {0}")]
    Eval(#[from] trace_core::TraceError),
}
