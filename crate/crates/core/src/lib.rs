//! Simulator and policy library for sharing one divisible resource among
//! tenants with SLAs, when the only feedback is which queues are non-empty.
//!
//! The [`engine`] drives any [`policies::Policy`] against any
//! [`workloads::LoadSource`] and records a [`trace::SimulationTrace`];
//! [`offline`] and [`metrics`] analyse the result.

pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod offline;
pub mod policies;
pub mod projection;
pub mod trace;
pub mod workloads;

pub use engine::{run, RunOptions};
pub use error::{Error, Result};
pub use model::{ActiveSet, Allocation, PolicyParams, QueueState, SlaVector};
pub use policies::{build_policy, MonitorMode, Policy, PolicySpec};
pub use trace::SimulationTrace;
pub use workloads::{LoadMatrix, LoadSource};
