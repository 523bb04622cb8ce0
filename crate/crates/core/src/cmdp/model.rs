use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sample::sample_index;
use super::space::LayeredStateSpace;
use crate::error::{ensure_len, Error, Result};
use crate::INPUT_TOL;

/// Transition kernel of a single context, stored densely as `[s][a][s']`.
///
/// Rows of terminal states are all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl Dynamics {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            probs: vec![0.0; num_states * num_actions * num_states],
        }
    }

    pub fn from_probs(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        ensure_len("dynamics table", num_states * num_actions * num_states, probs.len())?;
        Ok(Self {
            num_states,
            num_actions,
            probs,
        })
    }

    /// Deterministic dynamics: `next[s * num_actions + a]` is the successor of
    /// `(s, a)`; terminal states get an all-zero row.
    pub fn deterministic(space: &LayeredStateSpace, num_actions: usize, next: &[usize]) -> Result<Self> {
        let n = space.num_states();
        ensure_len("deterministic successor list", n * num_actions, next.len())?;
        let mut dynamics = Self::zeros(n, num_actions);
        for s in space.decision_states() {
            for a in 0..num_actions {
                dynamics.row_mut(s, a)[next[s * num_actions + a]] = 1.0;
            }
        }
        Ok(dynamics)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, state: usize, action: usize) -> &[f64] {
        let start = (state * self.num_actions + action) * self.num_states;
        &self.probs[start..start + self.num_states]
    }

    pub fn row_mut(&mut self, state: usize, action: usize) -> &mut [f64] {
        let start = (state * self.num_actions + action) * self.num_states;
        &mut self.probs[start..start + self.num_states]
    }

    pub fn prob(&self, state: usize, action: usize, next: usize) -> f64 {
        self.probs[(state * self.num_actions + action) * self.num_states + next]
    }
}

/// Mean losses of a single context, `[s][a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    num_states: usize,
    num_actions: usize,
    means: Vec<f64>,
}

impl Losses {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            means: vec![0.0; num_states * num_actions],
        }
    }

    pub fn from_means(num_states: usize, num_actions: usize, means: Vec<f64>) -> Result<Self> {
        ensure_len("loss table", num_states * num_actions, means.len())?;
        Ok(Self {
            num_states,
            num_actions,
            means,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn mean(&self, state: usize, action: usize) -> f64 {
        self.means[state * self.num_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.means[state * self.num_actions + action] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.means
    }
}

/// Per-context loss means `ℓ_c`, indexed by context.
pub type LossTable = Vec<Losses>;

/// Per-context transition kernels `P_c`, indexed by context.
pub type DynamicsTable = Vec<Dynamics>;

/// A stationary stochastic policy, `[s][a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl Policy {
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_states * num_actions],
        }
    }

    /// One-hot policy playing `actions[s]` in state `s`.
    pub fn deterministic(num_actions: usize, actions: &[usize]) -> Self {
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            probs[s * num_actions + a] = 1.0;
        }
        Self {
            num_states: actions.len(),
            num_actions,
            probs,
        }
    }

    /// Validated constructor; every row must be a probability vector.
    pub fn from_probs(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        ensure_len("policy table", num_states * num_actions, probs.len())?;
        for (s, row) in probs.chunks(num_actions.max(1)).enumerate() {
            check_distribution(row).map_err(|e| Error::NotADistribution(format!("policy row {s}: {e}")))?;
        }
        Ok(Self {
            num_states,
            num_actions,
            probs,
        })
    }

    pub(crate) fn from_rows_unchecked(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), num_states * num_actions);
        Self {
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state * self.num_actions + action]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Distribution `𝒟` over the finitely many contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextDistribution {
    weights: Vec<f64>,
}

impl ContextDistribution {
    pub fn uniform(num_contexts: usize) -> Self {
        Self {
            weights: vec![1.0 / num_contexts as f64; num_contexts],
        }
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_distribution(&weights).map_err(|e| Error::NotADistribution(format!("context weights: {e}")))?;
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, context: usize) -> f64 {
        self.weights[context]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.weights, rng)
    }
}

/// Ground-truth contextual MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdpModel {
    pub space: LayeredStateSpace,
    pub num_actions: usize,
    pub contexts: ContextDistribution,
    pub losses: LossTable,
    pub dynamics: DynamicsTable,
}

impl CmdpModel {
    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn horizon(&self) -> usize {
        self.space.horizon()
    }

    pub fn num_states(&self) -> usize {
        self.space.num_states()
    }

    pub fn check_context(&self, context: usize) -> Result<()> {
        if context < self.num_contexts() {
            Ok(())
        } else {
            Err(Error::ContextOutOfRange {
                context,
                num_contexts: self.num_contexts(),
            })
        }
    }
}

pub(crate) fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.is_empty() {
        return Err("empty vector".into());
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(format!("entry {x} is negative or not finite"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > INPUT_TOL {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}
