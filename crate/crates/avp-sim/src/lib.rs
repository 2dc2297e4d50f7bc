//! Deterministic multi-agent simulator of an automated valet parking
//! system: supervisor, planner, and tracker components talking to a
//! customer-interface environment over lossless directive-response
//! channels, with full trace recording for post-hoc contract checking.

pub mod engine;
pub mod environment;
pub mod geometry;
pub mod lot;
pub mod messaging;
pub mod planner;
pub mod scenario;
pub mod supervisor;
pub mod tracker;
pub mod trace_io;
pub mod vehicle;
