//! Finite-trace representation of behaviors and temporal operators evaluated
//! over discrete time steps.
//!
//! A [`Trace`] is a time-indexed record of named signals (numbers, booleans,
//! poses, message-id sets). Temporal operators (`leads to`, `precedes`,
//! `always from`, `starts_at`, `persistent`) are evaluated pointwise over
//! ticks and return three-valued [`Verdict`]s: obligations that remain open
//! when the horizon ends are `Pending`, not violations. Callers that know a
//! trace is quiescent may promote pending liveness verdicts to violations.

mod ops;
mod predicate;
mod trace;
mod value;

pub use ops::{check_persistent, eval_always_from, eval_leads_to, eval_precedes, eval_starts_at};
pub use predicate::{GlobalPredicate, TracePredicate};
pub use trace::{trace_from_bools, MessageInfo, SignalData, Trace, TraceBuilder};
pub use value::Value;

use thiserror::Error;

/// Errors raised while evaluating predicates or operators over a trace.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum TraceError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("signal `{signal}` has no value of the expected kind ({expected}) at tick {tick}")]
    WrongKind {
        signal: String,
        expected: &'static str,
        tick: usize,
    },
    #[error("tick {tick} out of range (horizon {horizon})")]
    TickOutOfRange { tick: usize, horizon: usize },
    #[error("signal `{0}` is not set-valued")]
    NotSetValued(String),
    #[error("invalid trace: {0}")]
    Invalid(String),
}

/// Three-valued outcome of checking a temporal property on a finite trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    /// The property holds over the whole trace.
    Holds,
    /// The property is definitely violated; carries the first offending tick.
    ViolatedAt(usize),
    /// An obligation opened but the horizon ended before it could resolve;
    /// carries the tick at which the earliest unresolved obligation opened.
    Pending(usize),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::ViolatedAt(_))
    }

    /// Treat an unresolved obligation as a violation. Used when the trace is
    /// known to be quiescent, so nothing further could have discharged it.
    pub fn promote_pending(self) -> Verdict {
        match self {
            Verdict::Pending(t) => Verdict::ViolatedAt(t),
            v => v,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::ViolatedAt(t) => write!(f, "violated-at-tick {t}"),
            Verdict::Pending(t) => write!(f, "pending (opened at tick {t})"),
        }
    }
}
