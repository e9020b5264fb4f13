//! Scheduling library and simulator for single-cell full-duplex wireless
//! systems with temporal fairness constraints.

pub mod channel;
pub mod feasibility;
pub mod harness;
pub mod rate;
pub mod scheduler;
pub mod threshopt;
pub mod virtual_user;
