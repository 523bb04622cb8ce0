use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning rate, bonus scales and confidence level of the learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub eta: f64,
    pub beta_loss: f64,
    pub beta_dyn: f64,
    /// Multiplies both bonus scales. `1` reproduces the theoretical schedule,
    /// `0` switches exploration off.
    pub bonus_scale: f64,
    pub delta: f64,
}

impl AlgoParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {x}"),
                })
            }
        };
        positive("eta", self.eta)?;
        positive("beta_loss", self.beta_loss)?;
        positive("beta_dyn", self.beta_dyn)?;
        if !(self.bonus_scale.is_finite() && self.bonus_scale >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "bonus_scale",
                reason: format!("must be finite and nonnegative, got {}", self.bonus_scale),
            });
        }
        check_delta(self.delta)
    }

    pub fn with_bonus_scale(self, bonus_scale: f64) -> Self {
        Self { bonus_scale, ..self }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must lie in (0, 1), got {delta}"),
        })
    }
}

/// The theoretical schedule:
///
/// ```text
/// η   = √(2 log|A| / (H² T))
/// β_ℓ = √(5184 T H⁷ L / (7  |S||A| log(T+1)))
/// β_P = √(5184 T H⁶ L / (14 |S||A| log(T+1)))
/// L   = log(128 T⁴ H |𝓕||𝒫| / δ²)
/// ```
///
/// `num_actions` must be at least 2, otherwise `η` vanishes.
pub fn default_parameters(
    episodes: usize,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    class_sizes: (usize, usize),
    delta: f64,
) -> Result<AlgoParams> {
    for (name, value) in [
        ("episodes", episodes),
        ("horizon", horizon),
        ("num_states", num_states),
        ("loss_class_size", class_sizes.0),
        ("dyn_class_size", class_sizes.1),
    ] {
        if value == 0 {
            return Err(Error::InvalidParameter {
                name,
                reason: "must be positive".into(),
            });
        }
    }
    if num_actions < 2 {
        return Err(Error::InvalidParameter {
            name: "num_actions",
            reason: format!("need at least 2 actions for a positive learning rate, got {num_actions}"),
        });
    }
    check_delta(delta)?;

    let t = episodes as f64;
    let h = horizon as f64;
    let sa = (num_states * num_actions) as f64;
    let log_term = 128f64.ln() + 4.0 * t.ln() + h.ln() + (class_sizes.0 as f64).ln() + (class_sizes.1 as f64).ln()
        - 2.0 * delta.ln();
    let log_episodes = (t + 1.0).ln();

    Ok(AlgoParams {
        eta: (2.0 * (num_actions as f64).ln() / (h * h * t)).sqrt(),
        beta_loss: (5184.0 * t * h.powi(7) * log_term / (7.0 * sa * log_episodes)).sqrt(),
        beta_dyn: (5184.0 * t * h.powi(6) * log_term / (14.0 * sa * log_episodes)).sqrt(),
        bonus_scale: 1.0,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_value() {
        let p = default_parameters(1000, 3, 6, 2, (8, 8), 0.1).unwrap();
        assert!((p.eta - (2.0 * 2f64.ln() / 9000.0).sqrt()).abs() < 1e-15);
        assert!((p.eta - 0.012411).abs() < 1e-6);
        assert_eq!(p.bonus_scale, 1.0);
        p.validate().unwrap();
    }

    #[test]
    fn bonus_scale_ratio() {
        for (t, h, s, a, f, pp, d) in [(1000, 3, 6, 2, 8, 8, 0.1), (7, 1, 2, 5, 1, 3, 0.5), (1, 6, 20, 3, 100, 2, 0.01)] {
            let p = default_parameters(t, h, s, a, (f, pp), d).unwrap();
            let ratio = p.beta_loss / p.beta_dyn;
            assert!((ratio - (2.0 * h as f64).sqrt()).abs() < 1e-12 * ratio);
        }
    }

    #[test]
    fn single_episode_is_finite() {
        let p = default_parameters(1, 2, 4, 2, (1, 1), 0.1).unwrap();
        for x in [p.eta, p.beta_loss, p.beta_dyn] {
            assert!(x.is_finite() && x > 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(default_parameters(0, 2, 4, 2, (1, 1), 0.1).is_err());
        assert!(default_parameters(10, 2, 4, 1, (1, 1), 0.1).is_err());
        assert!(default_parameters(10, 2, 4, 2, (0, 1), 0.1).is_err());
        assert!(default_parameters(10, 2, 4, 2, (1, 1), 1.0).is_err());
        assert!(default_parameters(10, 2, 4, 2, (1, 1), 0.0).is_err());
    }

    #[test]
    fn validate_params() {
        let p = default_parameters(10, 2, 4, 2, (1, 1), 0.1).unwrap();
        assert!(p.with_bonus_scale(0.0).validate().is_ok());
        assert!(p.with_bonus_scale(-1.0).validate().is_err());
        assert!(AlgoParams { eta: 0.0, ..p }.validate().is_err());
    }
}
