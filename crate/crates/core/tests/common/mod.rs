#![allow(dead_code)]

use opo_cmdp::cmdp::{CmdpModel, ContextDistribution, Dynamics, LayeredStateSpace, Losses, Policy};
use opo_cmdp::harness::{random_dynamics, random_losses, random_policy};
use proptest::prelude::*;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Instance {
    pub space: LayeredStateSpace,
    pub num_actions: usize,
    pub dynamics: Dynamics,
    pub losses: Losses,
    pub policy: Policy,
}

impl Instance {
    pub fn model(&self) -> CmdpModel {
        CmdpModel {
            space: self.space.clone(),
            num_actions: self.num_actions,
            contexts: ContextDistribution::uniform(1),
            losses: vec![self.losses.clone()],
            dynamics: vec![self.dynamics.clone()],
        }
    }
}

pub fn random_instance<R: Rng>(rng: &mut R, widths: &[usize], num_actions: usize) -> Instance {
    let space = LayeredStateSpace::from_widths(widths).unwrap();
    let dynamics = random_dynamics(&space, num_actions, 0.0, rng);
    let losses = random_losses(&space, num_actions, rng);
    let policy = random_policy(space.num_states(), num_actions, rng);
    Instance {
        space,
        num_actions,
        dynamics,
        losses,
        policy,
    }
}

/// Normalizes `raw` over `support`; all-zero weight falls back to the first
/// support entry.
fn fill_row(row: &mut [f64], support: &[usize], raw: &[f64]) {
    let total: f64 = support.iter().map(|&i| raw[i]).sum();
    for &i in support {
        row[i] = if total > 0.0 { raw[i] / total } else { 0.0 };
    }
    if total == 0.0 {
        row[support[0]] = 1.0;
    }
}

/// Layered instances with up to three inner layers of width at most three,
/// one to three actions, and sparse rows (zero entries are common).
pub fn instance() -> impl Strategy<Value = Instance> {
    (prop::collection::vec(1usize..=3, 0..=3), 1usize..=3).prop_flat_map(|(inner, num_actions)| {
        let mut widths = vec![1];
        widths.extend(inner);
        widths.push(1);
        let n: usize = widths.iter().sum();
        let weight = prop_oneof![1 => Just(0.0), 3 => 0.0..1.0f64];
        (
            Just(widths),
            Just(num_actions),
            prop::collection::vec(weight.clone(), n * num_actions * n),
            prop::collection::vec(0.0..=1.0f64, n * num_actions),
            prop::collection::vec(weight, n * num_actions),
        )
            .prop_map(|(widths, na, dyn_raw, loss_raw, pol_raw)| {
                let space = LayeredStateSpace::from_widths(&widths).unwrap();
                let n = space.num_states();
                let mut dynamics = Dynamics::zeros(n, na);
                let mut losses = Losses::zeros(n, na);
                let mut pol = vec![0.0; n * na];
                let actions: Vec<usize> = (0..na).collect();
                for s in space.decision_states() {
                    let next = space.layer(space.layer_of(s) + 1).to_vec();
                    for a in 0..na {
                        let raw = &dyn_raw[(s * na + a) * n..(s * na + a + 1) * n];
                        fill_row(dynamics.row_mut(s, a), &next, raw);
                        losses.set(s, a, loss_raw[s * na + a]);
                    }
                    fill_row(&mut pol[s * na..(s + 1) * na], &actions, &pol_raw[s * na..(s + 1) * na]);
                }
                let t = space.terminal_state();
                pol[t * na..(t + 1) * na].iter_mut().for_each(|x| *x = 1.0 / na as f64);
                Instance {
                    policy: Policy::from_probs(n, na, pol).unwrap(),
                    space,
                    num_actions: na,
                    dynamics,
                    losses,
                }
            })
    })
}

/// Probability vector of length `n` with some exact zeros.
pub fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.0..1.0f64], n).prop_map(|raw| {
        let mut row = vec![0.0; raw.len()];
        let support: Vec<usize> = (0..raw.len()).collect();
        fill_row(&mut row, &support, &raw);
        row
    })
}
