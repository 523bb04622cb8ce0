//! Finite function classes and the two offline regression oracles.
//!
//! Both oracles are exhaustive: every candidate is scored on the full
//! dataset and the best score wins, ties going to the smallest index. The
//! incremental variants keep one running objective per candidate, so a refit
//! after a new episode costs `O(|class|·H)`.

mod class;
mod diagnostics;
mod fit;

pub use class::{DynamicsClass, LossClass, TrajectoryDataset};
pub use diagnostics::{
    hellinger_diagnostic, squared_error_diagnostic, weighted_hellinger_error, weighted_squared_error,
};
pub use fit::{
    episode_log_likelihood, episode_squared_error, least_squares_fit, log_loss_fit, LeastSquaresOracle,
    LogLossOracle,
};
