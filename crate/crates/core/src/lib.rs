//! Optimistic policy optimization for stochastic contextual MDPs.
//!
//! The crate is split into four layers:
//!
//! - [`cmdp`]: layered (loop-free) contextual MDPs and the exact dynamic
//!   programs over them (occupancy measures, Bellman backups, optimal
//!   policies, trajectory sampling, distribution distances).
//! - [`oracles`]: finite loss and dynamics classes together with the offline
//!   least-squares and log-loss regression oracles.
//! - [`opo`]: the learner itself. Exploration bonuses computed from
//!   counterfactual occupancies, clipped optimistic backups, exponential
//!   weights, and on-demand replay of each context's policy sequence.
//! - [`harness`]: environment generation, the online interaction loop, exact
//!   regret accounting, baselines and inequality checks over finished runs.

pub mod cmdp;
pub mod error;
pub mod harness;
pub mod opo;
pub mod oracles;

pub use error::{Error, Result};

pub(crate) use cmdp::internal as cmdp_internal;

/// Tolerance applied to user-supplied probability rows and loss tables.
pub const INPUT_TOL: f64 = 1e-12;

/// Tolerance applied to quantities produced by floating-point recursions.
pub const COMPUTED_TOL: f64 = 1e-10;
