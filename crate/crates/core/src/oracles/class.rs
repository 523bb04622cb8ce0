use serde::{Deserialize, Serialize};

use crate::cmdp::{
    validate_dynamics, validate_losses, CmdpModel, DynamicsTable, LossTable, Trajectory, ValidationReport,
};
use crate::error::{Error, Result};

/// Finite class `𝓕` of per-context loss tables containing the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossClass {
    candidates: Vec<LossTable>,
    truth_index: usize,
}

/// Finite class `𝒫` of per-context dynamics tables containing the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsClass {
    candidates: Vec<DynamicsTable>,
    truth_index: usize,
}

fn check_index(len: usize, truth_index: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::EmptyClass);
    }
    if truth_index >= len {
        return Err(Error::InvalidParameter {
            name: "truth_index",
            reason: format!("{truth_index} out of range for a class of size {len}"),
        });
    }
    Ok(())
}

impl LossClass {
    pub fn new(candidates: Vec<LossTable>, truth_index: usize) -> Result<Self> {
        check_index(candidates.len(), truth_index)?;
        Ok(Self {
            candidates,
            truth_index,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn truth_index(&self) -> usize {
        self.truth_index
    }

    pub fn candidates(&self) -> &[LossTable] {
        &self.candidates
    }

    pub fn get(&self, index: usize) -> &LossTable {
        &self.candidates[index]
    }

    /// Every candidate must be a valid loss table for `model`, and the truth
    /// candidate must equal the model's losses.
    pub fn validate(&self, model: &CmdpModel) -> ValidationReport {
        let mut violations = Vec::new();
        for table in &self.candidates {
            check_table_len(table.len(), model.num_contexts(), &mut violations);
            for (c, losses) in table.iter().enumerate() {
                validate_losses(&model.space, model.num_actions, c, losses, &mut violations);
            }
        }
        ValidationReport { violations }
    }

    pub fn is_realizable(&self, model: &CmdpModel) -> bool {
        self.candidates[self.truth_index] == model.losses
    }
}

impl DynamicsClass {
    pub fn new(candidates: Vec<DynamicsTable>, truth_index: usize) -> Result<Self> {
        check_index(candidates.len(), truth_index)?;
        Ok(Self {
            candidates,
            truth_index,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn truth_index(&self) -> usize {
        self.truth_index
    }

    pub fn candidates(&self) -> &[DynamicsTable] {
        &self.candidates
    }

    pub fn get(&self, index: usize) -> &DynamicsTable {
        &self.candidates[index]
    }

    /// Every candidate must respect the model's layered structure.
    pub fn validate(&self, model: &CmdpModel) -> ValidationReport {
        let mut violations = Vec::new();
        for table in &self.candidates {
            check_table_len(table.len(), model.num_contexts(), &mut violations);
            for (c, dynamics) in table.iter().enumerate() {
                validate_dynamics(&model.space, model.num_actions, c, dynamics, &mut violations);
            }
        }
        ValidationReport { violations }
    }

    pub fn is_realizable(&self, model: &CmdpModel) -> bool {
        self.candidates[self.truth_index] == model.dynamics
    }
}

fn check_table_len(found: usize, expected: usize, out: &mut Vec<crate::cmdp::Violation>) {
    if found != expected {
        out.push(crate::cmdp::Violation::ContextCount { expected, found });
    }
}

/// Append-only log of observed episodes, in episode order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDataset {
    trajectories: Vec<Trajectory>,
}

impl TrajectoryDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, trajectory: Trajectory) {
        self.trajectories.push(trajectory);
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn as_slice(&self) -> &[Trajectory] {
        &self.trajectories
    }
}

impl FromIterator<Trajectory> for TrajectoryDataset {
    fn from_iter<I: IntoIterator<Item = Trajectory>>(iter: I) -> Self {
        Self {
            trajectories: iter.into_iter().collect(),
        }
    }
}
