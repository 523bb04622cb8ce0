use serde::Serialize;

use super::dp::{check_losses, expected_hellinger, value_backup};
use super::model::{Dynamics, Losses, Policy};
use super::space::LayeredStateSpace;
use crate::error::{Error, Result};
use crate::COMPUTED_TOL;

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + COMPUTED_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangeOfMeasureCheck {
    /// `V^π_{M̂}(s₁) ≤ 3 V^π_M(s₁) + 9H²·E_{P*,π}[Σ_h D²_H]`.
    pub forward: InequalityCheck,
    /// `V^π_M(s₁) ≤ 3 V^π_{M̂}(s₁) + (54H² + 162H⁴)·E_{P*,π}[Σ_h D²_H]`.
    pub reverse: InequalityCheck,
    /// `E_{P*,π}[Σ_h D²_H(P̂(·|s_h,a_h), P*(·|s_h,a_h))]`.
    pub expected_hellinger: f64,
}

impl ChangeOfMeasureCheck {
    pub fn holds(&self) -> bool {
        self.forward.holds() && self.reverse.holds()
    }
}

/// Evaluates the multiplicative value change-of-measure inequalities between
/// the true dynamics and an estimate, for a loss bounded in `[0, 1]`.
pub fn value_change_of_measure_check(
    space: &LayeredStateSpace,
    policy: &Policy,
    dynamics_true: &Dynamics,
    dynamics_est: &Dynamics,
    losses: &Losses,
) -> Result<ChangeOfMeasureCheck> {
    check_losses(space, policy.num_actions(), losses)?;
    if let Some(&bad) = losses.as_slice().iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidParameter {
            name: "losses",
            reason: format!("value {bad} outside [0, 1]"),
        });
    }
    let s1 = space.initial_state();
    let v_true = value_backup(space, policy, dynamics_true, losses)?.v(s1);
    let v_est = value_backup(space, policy, dynamics_est, losses)?.v(s1);
    let hellinger = expected_hellinger(space, policy, dynamics_true, dynamics_est)?;
    let h = space.horizon() as f64;
    Ok(ChangeOfMeasureCheck {
        forward: InequalityCheck {
            lhs: v_est,
            rhs: 3.0 * v_true + 9.0 * h * h * hellinger,
        },
        reverse: InequalityCheck {
            lhs: v_true,
            rhs: 3.0 * v_est + (54.0 * h.powi(2) + 162.0 * h.powi(4)) * hellinger,
        },
        expected_hellinger: hellinger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance() -> (LayeredStateSpace, Dynamics, Dynamics, Losses) {
        let space = LayeredStateSpace::from_widths(&[1, 2, 1]).unwrap();
        let mut p = Dynamics::zeros(4, 2);
        let mut p_hat = Dynamics::zeros(4, 2);
        for a in 0..2 {
            p.row_mut(0, a)[1] = 0.8;
            p.row_mut(0, a)[2] = 0.2;
            p_hat.row_mut(0, a)[1] = 0.1;
            p_hat.row_mut(0, a)[2] = 0.9;
            for s in 1..3 {
                p.row_mut(s, a)[3] = 1.0;
                p_hat.row_mut(s, a)[3] = 1.0;
            }
        }
        let losses = Losses::from_means(4, 2, vec![0.0, 0.0, 0.1, 0.1, 1.0, 1.0, 0.0, 0.0]).unwrap();
        (space, p, p_hat, losses)
    }

    #[test]
    fn equal_dynamics_reduce_to_tripling() {
        let (space, p, _, losses) = instance();
        let check = value_change_of_measure_check(&space, &Policy::uniform(4, 2), &p, &p, &losses).unwrap();
        let v = check.forward.lhs;
        assert_eq!(check.expected_hellinger, 0.0);
        assert!(check.holds());
        assert!((check.forward.slack() - 2.0 * v).abs() < 1e-15);
        assert!((check.reverse.slack() - 2.0 * v).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_holds() {
        let (space, p, p_hat, _) = instance();
        let zero = Losses::zeros(4, 2);
        let check = value_change_of_measure_check(&space, &Policy::uniform(4, 2), &p, &p_hat, &zero).unwrap();
        assert_eq!(check.forward.lhs, 0.0);
        assert!(check.expected_hellinger > 0.0);
        assert!(check.holds());
    }

    #[test]
    fn shifted_dynamics_hold_with_hellinger_term() {
        let (space, p, p_hat, losses) = instance();
        let check = value_change_of_measure_check(&space, &Policy::uniform(4, 2), &p, &p_hat, &losses).unwrap();
        // V_M = 0.8*0.1 + 0.2*1 = 0.28, V_M̂ = 0.1*0.1 + 0.9*1 = 0.91.
        assert!((check.reverse.lhs - 0.28).abs() < 1e-12);
        assert!((check.forward.lhs - 0.91).abs() < 1e-12);
        assert!(check.holds());
    }

    #[test]
    fn rejects_losses_outside_unit_interval() {
        let (space, p, p_hat, mut losses) = instance();
        losses.set(0, 0, 1.5);
        assert!(value_change_of_measure_check(&space, &Policy::uniform(4, 2), &p, &p_hat, &losses).is_err());
    }
}
