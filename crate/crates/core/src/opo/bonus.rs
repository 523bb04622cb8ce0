/// `min{1, (β/2)/(1 + n)}` for counterfactual occupancy `n`.
pub fn exploration_bonus(beta: f64, cum_occupancy: f64) -> f64 {
    (0.5 * beta / (1.0 + cum_occupancy)).min(1.0)
}

/// Loss bonus plus the dynamics bonus scaled by `2H`.
pub fn combined_bonus(bonus_loss: f64, bonus_dyn: f64, horizon: usize) -> f64 {
    bonus_loss + 2.0 * horizon as f64 * bonus_dyn
}
