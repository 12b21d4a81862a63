//! Deterministic discrete-event simulator of fixed-mobile convergence.
//!
//! Models a multi-homed customer endpoint with fixed (FBB) and mobile (MBB)
//! broadband access, aggregated by endpoint multipath, a hybrid access
//! gateway, or a converged core with ATSSS, using a coupled-congestion
//! multipath transport.

pub mod apps;
pub mod atsss;
pub mod harness;
pub mod mptransport;
pub mod netpath;
pub mod sim;

pub use sim::SimTime;
