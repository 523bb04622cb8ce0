use serde::{Deserialize, Serialize};

use super::distance::hellinger_sq_unchecked;
use super::model::{Dynamics, Losses, Policy};
use super::space::LayeredStateSpace;
use crate::error::{ensure_len, Result};

/// State-action visitation probabilities `q_h(s, a | π, P)`, stored `[s][a]`.
///
/// The layer `h` is implied by the state. Terminal-state entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyMeasure {
    num_actions: usize,
    q: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            q: vec![0.0; num_states * num_actions],
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.q[state * self.num_actions + action]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Total mass on layer `h`.
    pub fn layer_mass(&self, space: &LayeredStateSpace, h: usize) -> f64 {
        space
            .layer(h)
            .iter()
            .flat_map(|&s| self.q[s * self.num_actions..(s + 1) * self.num_actions].iter())
            .sum()
    }

    /// Elementwise `self += other`.
    pub fn accumulate(&mut self, other: &OccupancyMeasure) {
        for (x, y) in self.q.iter_mut().zip(&other.q) {
            *x += y;
        }
    }

    /// `Σ_{s,a} q(s,a)·f(s,a)`.
    pub fn dot(&self, f: &Losses) -> f64 {
        self.q.iter().zip(f.as_slice()).map(|(q, l)| q * l).sum()
    }
}

/// Per-state values `V` and per-state-action values `Q` for one context.
///
/// Terminal entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctions {
    num_actions: usize,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
}

impl ValueFunctions {
    pub(crate) fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            v: vec![0.0; num_states],
            q: vec![0.0; num_states * num_actions],
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn q(&self, state: usize, action: usize) -> f64 {
        self.q[state * self.num_actions + action]
    }

    pub fn q_row(&self, state: usize) -> &[f64] {
        &self.q[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub(crate) fn q_row_mut(&mut self, state: usize) -> &mut [f64] {
        &mut self.q[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn v(&self, state: usize) -> f64 {
        self.v[state]
    }
}

pub(crate) fn check_policy(space: &LayeredStateSpace, num_actions: usize, policy: &Policy) -> Result<()> {
    ensure_len("policy states", space.num_states(), policy.num_states())?;
    ensure_len("policy actions", num_actions, policy.num_actions())
}

pub(crate) fn check_dynamics(space: &LayeredStateSpace, num_actions: usize, dynamics: &Dynamics) -> Result<()> {
    ensure_len("dynamics states", space.num_states(), dynamics.num_states())?;
    ensure_len("dynamics actions", num_actions, dynamics.num_actions())
}

pub(crate) fn check_losses(space: &LayeredStateSpace, num_actions: usize, losses: &Losses) -> Result<()> {
    ensure_len("loss states", space.num_states(), losses.num_states())?;
    ensure_len("loss actions", num_actions, losses.num_actions())
}

/// `Σ_{s'} P(s'|s,a) V(s')` over the next layer.
pub(crate) fn expected_next(space: &LayeredStateSpace, dynamics: &Dynamics, state: usize, action: usize, v: &[f64]) -> f64 {
    let row = dynamics.row(state, action);
    space.layer(space.layer_of(state) + 1).iter().map(|&next| row[next] * v[next]).sum()
}

/// Forward recursion for the occupancy measure of `policy` under `dynamics`.
pub fn occupancy_measures(space: &LayeredStateSpace, policy: &Policy, dynamics: &Dynamics) -> Result<OccupancyMeasure> {
    let num_actions = policy.num_actions();
    check_policy(space, num_actions, policy)?;
    check_dynamics(space, num_actions, dynamics)?;

    let mut state_mass = vec![0.0; space.num_states()];
    state_mass[space.initial_state()] = 1.0;
    let mut occupancy = OccupancyMeasure::zeros(space.num_states(), num_actions);
    for h in 0..space.horizon() {
        let next_layer = space.layer(h + 1);
        for &s in space.layer(h) {
            let mass = state_mass[s];
            for a in 0..num_actions {
                let q = mass * policy.prob(s, a);
                occupancy.q[s * num_actions + a] = q;
                if q == 0.0 {
                    continue;
                }
                let row = dynamics.row(s, a);
                for &next in next_layer {
                    state_mass[next] += q * row[next];
                }
            }
        }
    }
    Ok(occupancy)
}

/// Bellman evaluation of `policy` on `(dynamics, losses)`.
pub fn value_backup(
    space: &LayeredStateSpace,
    policy: &Policy,
    dynamics: &Dynamics,
    losses: &Losses,
) -> Result<ValueFunctions> {
    let num_actions = policy.num_actions();
    check_policy(space, num_actions, policy)?;
    check_dynamics(space, num_actions, dynamics)?;
    check_losses(space, num_actions, losses)?;

    let mut values = ValueFunctions::zeros(space.num_states(), num_actions);
    for h in (0..space.horizon()).rev() {
        for &s in space.layer(h) {
            let mut v = 0.0;
            for a in 0..num_actions {
                let q = losses.mean(s, a) + expected_next(space, dynamics, s, a, &values.v);
                values.q[s * num_actions + a] = q;
                v += policy.prob(s, a) * q;
            }
            values.v[s] = v;
        }
    }
    Ok(values)
}

/// Backward induction for a deterministic optimal policy.
///
/// Ties go to the smallest action index. Terminal rows of the returned
/// policy play action 0.
pub fn optimal_policy(
    space: &LayeredStateSpace,
    dynamics: &Dynamics,
    losses: &Losses,
) -> Result<(Policy, ValueFunctions)> {
    let num_actions = losses.num_actions();
    check_dynamics(space, num_actions, dynamics)?;
    check_losses(space, num_actions, losses)?;

    let mut values = ValueFunctions::zeros(space.num_states(), num_actions);
    let mut actions = vec![0; space.num_states()];
    for h in (0..space.horizon()).rev() {
        for &s in space.layer(h) {
            let mut best = f64::INFINITY;
            for a in 0..num_actions {
                let q = losses.mean(s, a) + expected_next(space, dynamics, s, a, &values.v);
                values.q[s * num_actions + a] = q;
                if q < best {
                    best = q;
                    actions[s] = a;
                }
            }
            values.v[s] = best;
        }
    }
    Ok((Policy::deterministic(num_actions, &actions), values))
}

/// `E_{P*,π}[Σ_h D²_H(P̂(·|s_h,a_h), P*(·|s_h,a_h))]`, computed exactly from
/// the occupancy of `policy` under `dynamics_true`.
pub fn expected_hellinger(
    space: &LayeredStateSpace,
    policy: &Policy,
    dynamics_true: &Dynamics,
    dynamics_est: &Dynamics,
) -> Result<f64> {
    check_dynamics(space, policy.num_actions(), dynamics_est)?;
    let occupancy = occupancy_measures(space, policy, dynamics_true)?;
    Ok(hellinger_weighted(space, &occupancy, dynamics_est, dynamics_true))
}

/// `Σ_{s,a} w(s,a)·D²_H(P̂(·|s,a), P*(·|s,a))` for any nonnegative weights.
pub fn hellinger_weighted(
    space: &LayeredStateSpace,
    weights: &OccupancyMeasure,
    dynamics_est: &Dynamics,
    dynamics_true: &Dynamics,
) -> f64 {
    let mut total = 0.0;
    for s in space.decision_states() {
        for a in 0..weights.num_actions() {
            let w = weights.get(s, a);
            if w != 0.0 {
                total += w * hellinger_sq_unchecked(dynamics_est.row(s, a), dynamics_true.row(s, a));
            }
        }
    }
    total
}
