//! Layered contextual MDPs and exact dynamic programming over them.
//!
//! States carry one global contiguous index; [`LayeredStateSpace`] maps each
//! index to its layer. Layers are zero-based here: layer `0` holds the unique
//! initial state and layer `H` holds the unique terminal state, so a horizon
//! `H` model has `H + 1` layers and `H` decision steps.

mod distance;
mod dp;
mod measure_change;
mod model;
mod sample;
mod space;
mod validate;

pub(crate) use dp::hellinger_weighted as dp_hellinger_weighted;

pub(crate) mod internal {
    pub(crate) use super::dp::{check_dynamics, check_losses, check_policy, expected_next};
}
pub use distance::{hellinger_sq, tv_distance};
pub use dp::{
    expected_hellinger, occupancy_measures, optimal_policy, value_backup, OccupancyMeasure,
    ValueFunctions,
};
pub use measure_change::{value_change_of_measure_check, ChangeOfMeasureCheck, InequalityCheck};
pub use model::{
    CmdpModel, ContextDistribution, Dynamics, DynamicsTable, LossTable, Losses, Policy,
};
pub use sample::{sample_index, sample_trajectory, LossMode, Step, Trajectory};
pub use space::LayeredStateSpace;
pub use validate::{validate_dynamics, validate_losses, validate_model, ValidationReport, Violation};
