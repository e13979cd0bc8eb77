//! Closed-loop identification of a scalar linear-Gaussian system under
//! deterministic excitation policies, with information-utility accounting
//! and capacity-based learning-rate bounds.
//!
//! The crate simulates `x_{t+1} = a x_t + b u_t + w_t` in closed loop,
//! tracks the D-optimality utility of a regularized least-squares estimator
//! of `[a, b]`, and verifies a chain of channel-capacity upper bounds on the
//! achievable learning rate against seeded Monte Carlo estimates:
//!
//! - [`sysid`] — plant, policies, trajectory simulation;
//! - [`estimator`] — recursive and batch regularized least squares;
//! - [`infotheory`] — utilities, capacities, bounds, diagnostics;
//! - [`experiment`] — seeded parallel Monte Carlo and aggregation;
//! - [`linalg`], [`rng`] — closed-form 2x2 arithmetic and replayable
//!   random streams underneath it all.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod infotheory;
pub mod linalg;
pub mod rng;
mod stats;
pub mod sysid;

pub use error::{Error, Result};
pub use estimator::Belief;
pub use experiment::{
    all_enforced_pass, evaluate_bound_checks, AggregateStats, BoundCheck, ExperimentConfig,
    RunResult, SweepRow,
};
pub use infotheory::{BoundReport, IndependenceDiagnostics, UtilityLedger};
pub use linalg::{Mat2, Vec2};
pub use rng::RngStream;
pub use sysid::{PolicySpec, SystemSpec, Trajectory};
