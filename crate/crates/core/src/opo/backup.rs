use crate::cmdp::{Dynamics, LayeredStateSpace, Losses, Policy, ValueFunctions};
use crate::cmdp_internal::{check_dynamics, check_losses, check_policy, expected_next};
use crate::error::{ensure_len, Result};

/// Optimistic `Q̂`/`V̂` of one context at one stage.
pub type OptimisticValues = ValueFunctions;

/// Backward induction on the optimistic loss `f̂ − b` under `P̂`, clipping
/// every `Q̂` entry below at zero. `bonus` is a `[s][a]` table.
pub fn optimistic_backup(
    space: &LayeredStateSpace,
    f_hat: &Losses,
    p_hat: &Dynamics,
    bonus: &[f64],
    policy: &Policy,
) -> Result<OptimisticValues> {
    let num_actions = policy.num_actions();
    check_policy(space, num_actions, policy)?;
    check_dynamics(space, num_actions, p_hat)?;
    check_losses(space, num_actions, f_hat)?;
    ensure_len("bonus table", space.num_states() * num_actions, bonus.len())?;

    let mut values = ValueFunctions::zeros(space.num_states(), num_actions);
    for h in (0..space.horizon()).rev() {
        for &s in space.layer(h) {
            let mut v = 0.0;
            for a in 0..num_actions {
                let optimistic_loss = f_hat.mean(s, a) - bonus[s * num_actions + a];
                let q = (optimistic_loss + expected_next(space, p_hat, s, a, &values.v)).max(0.0);
                values.q_row_mut(s)[a] = q;
                v += policy.prob(s, a) * q;
            }
            values.v[s] = v;
        }
    }
    Ok(values)
}

/// Exponential-weights step `π'(a|s) ∝ π(a|s)·exp(−η Q̂(s,a))`.
///
/// Each row is shifted by its smallest `Q̂` before exponentiating, so the
/// largest factor is exactly 1.
pub fn policy_improve(policy: &Policy, values: &OptimisticValues, eta: f64) -> Result<Policy> {
    let num_actions = policy.num_actions();
    ensure_len("value actions", num_actions, values.num_actions())?;
    ensure_len("value states", policy.num_states(), values.v.len())?;

    let mut probs = Vec::with_capacity(policy.as_slice().len());
    for s in 0..policy.num_states() {
        let q = values.q_row(s);
        let shift = q.iter().copied().fold(f64::INFINITY, f64::min);
        let start = probs.len();
        probs.extend(
            policy
                .row(s)
                .iter()
                .zip(q)
                .map(|(p, q)| p * (-eta * (q - shift)).exp()),
        );
        let total: f64 = probs[start..].iter().sum();
        for p in &mut probs[start..] {
            *p /= total;
        }
    }
    Ok(Policy::from_rows_unchecked(policy.num_states(), num_actions, probs))
}
