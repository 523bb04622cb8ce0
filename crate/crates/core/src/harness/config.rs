use serde::{Deserialize, Serialize};

use crate::cmdp::{ContextDistribution, LossMode};
use crate::error::{Error, Result};

/// One experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of episodes `T`.
    pub episodes: usize,
    pub horizon: usize,
    /// `|S_1| … |S_{H+1}|`; first and last must be 1.
    pub layer_widths: Vec<usize>,
    pub num_actions: usize,
    #[serde(default = "default_num_contexts")]
    pub num_contexts: usize,
    pub loss_class_size: usize,
    pub dyn_class_size: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_bonus_scale")]
    pub bonus_scale: f64,
    #[serde(default)]
    pub loss_mode: LossMode,
    /// Categorical context distribution; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_weights: Option<Vec<f64>>,
    pub seed: u64,
}

fn default_num_contexts() -> usize {
    1
}

fn default_delta() -> f64 {
    0.1
}

fn default_bonus_scale() -> f64 {
    1.0
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Five contexts, widths `(1, 2, 2, 1)`, two actions, eight candidates
    /// per class, `T = 1000`, `δ = 0.1`.
    pub fn standard(seed: u64) -> Self {
        Self {
            episodes: 1000,
            horizon: 3,
            layer_widths: vec![1, 2, 2, 1],
            num_actions: 2,
            num_contexts: 5,
            loss_class_size: 8,
            dyn_class_size: 8,
            delta: 0.1,
            bonus_scale: 1.0,
            loss_mode: LossMode::Bernoulli,
            context_weights: None,
            seed,
        }
    }

    pub fn num_states(&self) -> usize {
        self.layer_widths.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes < 1 {
            return Err(invalid("episodes", "T must be at least 1"));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "H must be at least 1"));
        }
        if self.layer_widths.len() != self.horizon + 1 {
            return Err(invalid(
                "layer_widths",
                format!("expected H + 1 = {} layers, got {}", self.horizon + 1, self.layer_widths.len()),
            ));
        }
        if self.layer_widths[0] != 1 || self.layer_widths[self.horizon] != 1 {
            return Err(invalid("layer_widths", "first and last layers must have width 1"));
        }
        if self.layer_widths.contains(&0) {
            return Err(invalid("layer_widths", "every layer needs at least one state"));
        }
        if self.num_actions < 2 {
            return Err(invalid("num_actions", "need at least 2 actions"));
        }
        if self.num_contexts < 1 {
            return Err(invalid("num_contexts", "need at least 1 context"));
        }
        if self.loss_class_size < 1 {
            return Err(invalid("loss_class_size", "class must be nonempty"));
        }
        if self.dyn_class_size < 1 {
            return Err(invalid("dyn_class_size", "class must be nonempty"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.bonus_scale.is_finite() && self.bonus_scale >= 0.0) {
            return Err(invalid("bonus_scale", format!("must be finite and nonnegative, got {}", self.bonus_scale)));
        }
        if let Some(weights) = &self.context_weights {
            if weights.len() != self.num_contexts {
                return Err(invalid(
                    "context_weights",
                    format!("expected {} weights, got {}", self.num_contexts, weights.len()),
                ));
            }
            ContextDistribution::new(weights.clone()).map_err(|e| invalid("context_weights", e.to_string()))?;
        }
        Ok(())
    }

    pub fn context_distribution(&self) -> Result<ContextDistribution> {
        match &self.context_weights {
            Some(weights) => ContextDistribution::new(weights.clone()),
            None => Ok(ContextDistribution::uniform(self.num_contexts)),
        }
    }
}
