use crate::cmdp::{occupancy_measures, CmdpModel, DynamicsTable, LossTable, Losses, OccupancyMeasure, Policy};
use crate::error::{ensure_len, Result};

/// `Σ_{s,a} w(s,a)·(f̂(s,a) − f*(s,a))²`.
pub fn weighted_squared_error(weights: &OccupancyMeasure, f_hat: &Losses, f_star: &Losses) -> f64 {
    weights
        .as_slice()
        .iter()
        .zip(f_hat.as_slice().iter().zip(f_star.as_slice()))
        .map(|(w, (a, b))| w * (a - b) * (a - b))
        .sum()
}

/// `Σ_{s,a} w(s,a)·D²_H(P*(·|s,a), P̂(·|s,a))`.
pub fn weighted_hellinger_error(
    model: &CmdpModel,
    weights: &OccupancyMeasure,
    p_hat: &crate::cmdp::Dynamics,
    p_star: &crate::cmdp::Dynamics,
) -> f64 {
    crate::cmdp::dp_hellinger_weighted(&model.space, weights, p_hat, p_star)
}

fn check_shapes(model: &CmdpModel, tables: usize, past_policies: &[Vec<Policy>]) -> Result<()> {
    ensure_len("per-context tables", model.num_contexts(), tables)?;
    ensure_len("per-context policy sequences", model.num_contexts(), past_policies.len())
}

/// `E_c[Σ_i E_{π^i_c, P*_c}[Σ_h (f̂_c − f*_c)²(s_h, a_h)]]`, exact via
/// occupancy measures under the model's dynamics.
pub fn squared_error_diagnostic(
    f_hat: &LossTable,
    f_star: &LossTable,
    past_policies: &[Vec<Policy>],
    model: &CmdpModel,
) -> Result<f64> {
    check_shapes(model, f_hat.len(), past_policies)?;
    ensure_len("per-context tables", model.num_contexts(), f_star.len())?;
    let mut total = 0.0;
    for (c, policies) in past_policies.iter().enumerate() {
        let mut per_context = 0.0;
        for policy in policies {
            let q = occupancy_measures(&model.space, policy, &model.dynamics[c])?;
            per_context += weighted_squared_error(&q, &f_hat[c], &f_star[c]);
        }
        total += model.contexts.weight(c) * per_context;
    }
    Ok(total)
}

/// `E_c[Σ_i E_{π^i_c, P*_c}[Σ_h D²_H(P*_c(·|s_h,a_h), P̂_c(·|s_h,a_h))]]`.
pub fn hellinger_diagnostic(
    p_hat: &DynamicsTable,
    p_star: &DynamicsTable,
    past_policies: &[Vec<Policy>],
    model: &CmdpModel,
) -> Result<f64> {
    check_shapes(model, p_hat.len(), past_policies)?;
    ensure_len("per-context tables", model.num_contexts(), p_star.len())?;
    let mut total = 0.0;
    for (c, policies) in past_policies.iter().enumerate() {
        let mut per_context = 0.0;
        for policy in policies {
            let q = occupancy_measures(&model.space, policy, &p_star[c])?;
            per_context += weighted_hellinger_error(model, &q, &p_hat[c], &p_star[c]);
        }
        total += model.contexts.weight(c) * per_context;
    }
    Ok(total)
}
