use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::RunRecord;
use crate::error::{Error, Result};
use crate::opo::default_parameters;

/// `Σ_t V^{π^t}_{c_t}(s₁) − V*_{c_t}(s₁)`.
pub fn pseudo_regret(records: &[RunRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(records.iter().map(|r| r.regret_increment).sum())
}

/// `Σ_t E_{c∼𝒟}[V^{π^t}_c(s₁) − V*_c(s₁)]`.
pub fn expected_regret(records: &[RunRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(records.iter().map(|r| r.expected_regret_increment).sum())
}

/// The six summands of the high-probability expected-regret bound, with the
/// unscaled default `β_ℓ`, `β_P`:
///
/// ```text
/// H + H(H+1)
/// 224 T H³ L / β_ℓ
/// 50 T H⁴ log(8TH|𝒫|/δ) / β_P
/// 5184 T H⁷ log(4TH|𝒫|/δ) / min(β_ℓ, β_P)
/// 7 (β_ℓ + 2H β_P) |S||A| log(T+1)
/// √(2 H⁴ T log|A|)
/// ```
pub fn regret_bound_terms(config: &ExperimentConfig) -> Result<[f64; 6]> {
    config.validate()?;
    let t = config.episodes as f64;
    let h = config.horizon as f64;
    let s = config.num_states() as f64;
    let a = config.num_actions as f64;
    let f = config.loss_class_size as f64;
    let p = config.dyn_class_size as f64;
    let delta = config.delta;
    let params = default_parameters(
        config.episodes,
        config.horizon,
        config.num_states(),
        config.num_actions,
        (config.loss_class_size, config.dyn_class_size),
        delta,
    )?;
    let (bl, bp) = (params.beta_loss, params.beta_dyn);
    let big_l = 128f64.ln() + 4.0 * t.ln() + h.ln() + f.ln() + p.ln() - 2.0 * delta.ln();
    let log_8 = 8f64.ln() + t.ln() + h.ln() + p.ln() - delta.ln();
    let log_4 = 4f64.ln() + t.ln() + h.ln() + p.ln() - delta.ln();
    Ok([
        h + h * (h + 1.0),
        224.0 * t * h.powi(3) * big_l / bl,
        50.0 * t * h.powi(4) * log_8 / bp,
        5184.0 * t * h.powi(7) * log_4 / bl.min(bp),
        7.0 * (bl + 2.0 * h * bp) * s * a * (t + 1.0).ln(),
        (2.0 * h.powi(4) * t * a.ln()).sqrt(),
    ])
}

pub fn regret_bound(config: &ExperimentConfig) -> Result<f64> {
    Ok(regret_bound_terms(config)?.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzumaCheck {
    /// `|𝓡_T − E𝓡_T|`.
    pub gap: f64,
    /// `2H√(2T log(8/δ))`.
    pub bound: f64,
}

impl AzumaCheck {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

pub fn azuma_gap_check(records: &[RunRecord], horizon: usize, delta: f64) -> Result<AzumaCheck> {
    let gap = (pseudo_regret(records)? - expected_regret(records)?).abs();
    let t = records.len() as f64;
    let bound = 2.0 * horizon as f64 * (2.0 * t * (8.0 / delta).ln()).sqrt();
    Ok(AzumaCheck { gap, bound })
}

/// Largest diagnostic over all prefixes against the oracle generalization
/// bounds `68H log(2T³|𝓕|/δ)` and `2H log(TH|𝒫|/δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    pub max_sq_err: f64,
    pub sq_err_bound: f64,
    pub max_hellinger: f64,
    pub hellinger_bound: f64,
}

impl ConcentrationCheck {
    pub fn holds(&self) -> bool {
        self.max_sq_err <= self.sq_err_bound && self.max_hellinger <= self.hellinger_bound
    }
}

pub fn concentration_check(config: &ExperimentConfig, records: &[RunRecord]) -> Result<ConcentrationCheck> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let t = config.episodes as f64;
    let h = config.horizon as f64;
    let delta = config.delta;
    let sq_err_bound =
        68.0 * h * (2f64.ln() + 3.0 * t.ln() + (config.loss_class_size as f64).ln() - delta.ln());
    let hellinger_bound = 2.0 * h * (t.ln() + h.ln() + (config.dyn_class_size as f64).ln() - delta.ln());
    Ok(ConcentrationCheck {
        max_sq_err: records.iter().map(|r| r.sq_err_diag).fold(0.0, f64::max),
        sq_err_bound,
        max_hellinger: records.iter().map(|r| r.hellinger_diag).fold(0.0, f64::max),
        hellinger_bound,
    })
}

/// Least-squares slope of `log R_t` against `log t` over the second half of
/// the run. `None` when fewer than two points with positive regret remain.
pub fn loglog_slope(cumulative: &[f64]) -> Option<f64> {
    let n = cumulative.len();
    let points: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&i| cumulative[i] > 0.0)
        .map(|i| (((i + 1) as f64).ln(), cumulative[i].ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(increment: f64, expected: f64) -> RunRecord {
        RunRecord {
            episode: 1,
            context: 0,
            realized_value: 0.0,
            optimal_value: 0.0,
            regret_increment: increment,
            cum_regret: increment,
            expected_regret_increment: expected,
            cum_expected_regret: expected,
            loss_estimator: None,
            dyn_estimator: None,
            bonus_mass: 0.0,
            sq_err_diag: 0.0,
            hellinger_diag: 0.0,
        }
    }

    #[test]
    fn empty_records_are_rejected() {
        assert_eq!(pseudo_regret(&[]), Err(Error::EmptyRecords));
        assert_eq!(expected_regret(&[]), Err(Error::EmptyRecords));
    }

    #[test]
    fn single_uniform_episode() {
        let r = [record(0.2, 0.2)];
        assert!((pseudo_regret(&r).unwrap() - 0.2).abs() < 1e-15);
        assert!((expected_regret(&r).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_gap_passes_azuma() {
        let r = vec![record(0.0, 0.0); 50];
        let check = azuma_gap_check(&r, 3, 0.1).unwrap();
        assert_eq!(check.gap, 0.0);
        assert!(check.holds());
        let expected = 6.0 * (100.0 * 80f64.ln()).sqrt();
        assert!((check.bound - expected).abs() < 1e-12);
    }

    #[test]
    fn bound_exceeds_horizon_times_episodes() {
        for seed in 0..3 {
            let config = ExperimentConfig::standard(seed);
            let bound = regret_bound(&config).unwrap();
            assert!(bound.is_finite());
            assert!(bound > (config.horizon * config.episodes) as f64);
        }
        let tiny = ExperimentConfig {
            episodes: 1,
            horizon: 1,
            layer_widths: vec![1, 1],
            num_contexts: 1,
            loss_class_size: 1,
            dyn_class_size: 1,
            ..ExperimentConfig::standard(0)
        };
        assert!(regret_bound(&tiny).unwrap() > 1.0);
    }

    #[test]
    fn bound_terms_match_direct_formula() {
        let config = ExperimentConfig::standard(0);
        let terms = regret_bound_terms(&config).unwrap();
        let (t, h, s, a, f, p, d) = (1000f64, 3f64, 6f64, 2f64, 8f64, 8f64, 0.1f64);
        let big_l = (128.0 * t.powi(4) * h * f * p / (d * d)).ln();
        let bl = (5184.0 * t * h.powi(7) * big_l / (7.0 * s * a * (t + 1.0).ln())).sqrt();
        let bp = (5184.0 * t * h.powi(6) * big_l / (14.0 * s * a * (t + 1.0).ln())).sqrt();
        let direct = [
            h + h * (h + 1.0),
            224.0 * t * h.powi(3) * big_l / bl,
            50.0 * t * h.powi(4) * (8.0 * t * h * p / d).ln() / bp,
            5184.0 * t * h.powi(7) * (4.0 * t * h * p / d).ln() / bl.min(bp),
            7.0 * (bl + 2.0 * h * bp) * s * a * (t + 1.0).ln(),
            (2.0 * h.powi(4) * t * a.ln()).sqrt(),
        ];
        for (x, y) in terms.iter().zip(direct) {
            assert!((x - y).abs() <= 1e-10 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn slope_of_power_laws() {
        let sqrt: Vec<f64> = (1..=1000).map(|t| (t as f64).sqrt()).collect();
        assert!((loglog_slope(&sqrt).unwrap() - 0.5).abs() < 1e-12);
        let linear: Vec<f64> = (1..=1000).map(|t| 0.3 * t as f64).collect();
        assert!((loglog_slope(&linear).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[0.0; 10]), None);
    }
}
