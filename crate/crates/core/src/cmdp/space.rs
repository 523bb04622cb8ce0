use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A loop-free layered state space with singleton first and last layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredStateSpace {
    layer_of: Vec<usize>,
    layers: Vec<Vec<usize>>,
}

impl LayeredStateSpace {
    /// Builds a space whose states are numbered contiguously layer by layer.
    pub fn from_widths(widths: &[usize]) -> Result<Self> {
        let mut next = 0;
        let layers = widths
            .iter()
            .map(|&w| {
                let layer: Vec<usize> = (next..next + w).collect();
                next += w;
                layer
            })
            .collect();
        Self::from_layers(layers)
    }

    pub fn from_layers(layers: Vec<Vec<usize>>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 layers, got {}",
                layers.len()
            )));
        }
        if layers[0].len() != 1 || layers[layers.len() - 1].len() != 1 {
            return Err(Error::InvalidStateSpace(
                "first and last layers must be singletons".into(),
            ));
        }
        let num_states: usize = layers.iter().map(Vec::len).sum();
        let mut layer_of = vec![usize::MAX; num_states];
        for (h, layer) in layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(Error::InvalidStateSpace(format!("layer {h} is empty")));
            }
            for &s in layer {
                if s >= num_states {
                    return Err(Error::InvalidStateSpace(format!(
                        "state {s} out of range for {num_states} states"
                    )));
                }
                if layer_of[s] != usize::MAX {
                    return Err(Error::InvalidStateSpace(format!(
                        "state {s} appears in more than one layer"
                    )));
                }
                layer_of[s] = h;
            }
        }
        Ok(Self { layer_of, layers })
    }

    pub fn num_states(&self) -> usize {
        self.layer_of.len()
    }

    /// Number of decision steps `H`.
    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer_of(&self, state: usize) -> usize {
        self.layer_of[state]
    }

    pub fn layer(&self, h: usize) -> &[usize] {
        &self.layers[h]
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn initial_state(&self) -> usize {
        self.layers[0][0]
    }

    pub fn terminal_state(&self) -> usize {
        self.layers[self.horizon()][0]
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.layer_of[state] == self.horizon()
    }

    /// All non-terminal states, in layer order.
    pub fn decision_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers[..self.horizon()].iter().flatten().copied()
    }
}
