use super::model::check_distribution;
use crate::error::{ensure_len, Error, Result};

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    ensure_len("distribution length", p.len(), q.len())?;
    check_distribution(p).map_err(|e| Error::NotADistribution(format!("first argument: {e}")))?;
    check_distribution(q).map_err(|e| Error::NotADistribution(format!("second argument: {e}")))
}

/// Squared Hellinger distance `Σ_x (√p(x) − √q(x))²`, in `[0, 2]`.
pub fn hellinger_sq(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(hellinger_sq_unchecked(p, q))
}

pub(crate) fn hellinger_sq_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum()
}

/// Total variation distance `½ Σ_x |p(x) − q(x)|`, in `[0, 1]`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
