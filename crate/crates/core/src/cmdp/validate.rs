use thiserror::Error;

use super::model::{CmdpModel, Dynamics, Losses};
use super::space::LayeredStateSpace;
use crate::INPUT_TOL;

/// A single broken invariant, located by its indices.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("context weights: {0}")]
    ContextWeights(String),

    #[error("context {context}: {what} table has the wrong shape")]
    TableShape { context: usize, what: &'static str },

    #[error("expected {expected} per-context tables, found {found}")]
    ContextCount { expected: usize, found: usize },

    #[error("transition row (c={context}, s={state}, a={action}) sums to {sum}")]
    TransitionRowSum {
        context: usize,
        state: usize,
        action: usize,
        sum: f64,
    },

    #[error("transition (c={context}, s={state}, a={action}) -> {next} has invalid probability {prob}")]
    InvalidTransition {
        context: usize,
        state: usize,
        action: usize,
        next: usize,
        prob: f64,
    },

    #[error("transition (c={context}, s={state}, a={action}) puts mass {prob} on {next} outside the next layer")]
    NotLoopFree {
        context: usize,
        state: usize,
        action: usize,
        next: usize,
        prob: f64,
    },

    #[error("loss (c={context}, s={state}, a={action}) = {value} is outside [0, 1]")]
    LossOutOfRange {
        context: usize,
        state: usize,
        action: usize,
        value: f64,
    },

    #[error("terminal loss (c={context}, a={action}) = {value} is not zero")]
    TerminalLoss { context: usize, action: usize, value: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_dynamics(
    space: &LayeredStateSpace,
    num_actions: usize,
    context: usize,
    dynamics: &Dynamics,
    out: &mut Vec<Violation>,
) {
    if dynamics.num_states() != space.num_states() || dynamics.num_actions() != num_actions {
        out.push(Violation::TableShape {
            context,
            what: "dynamics",
        });
        return;
    }
    for s in 0..space.num_states() {
        let h = space.layer_of(s);
        let terminal = space.is_terminal(s);
        for a in 0..num_actions {
            let row = dynamics.row(s, a);
            for (next, &prob) in row.iter().enumerate() {
                if !prob.is_finite() || prob < 0.0 {
                    out.push(Violation::InvalidTransition {
                        context,
                        state: s,
                        action: a,
                        next,
                        prob,
                    });
                } else if prob != 0.0 && (terminal || space.layer_of(next) != h + 1) {
                    out.push(Violation::NotLoopFree {
                        context,
                        state: s,
                        action: a,
                        next,
                        prob,
                    });
                }
            }
            if !terminal {
                let sum: f64 = row.iter().sum();
                if !((sum - 1.0).abs() <= INPUT_TOL) {
                    out.push(Violation::TransitionRowSum {
                        context,
                        state: s,
                        action: a,
                        sum,
                    });
                }
            }
        }
    }
}

pub fn validate_losses(
    space: &LayeredStateSpace,
    num_actions: usize,
    context: usize,
    losses: &Losses,
    out: &mut Vec<Violation>,
) {
    if losses.num_states() != space.num_states() || losses.num_actions() != num_actions {
        out.push(Violation::TableShape { context, what: "loss" });
        return;
    }
    for s in 0..space.num_states() {
        for a in 0..num_actions {
            let value = losses.mean(s, a);
            if space.is_terminal(s) {
                if value != 0.0 {
                    out.push(Violation::TerminalLoss {
                        context,
                        action: a,
                        value,
                    });
                }
            } else if !(0.0..=1.0).contains(&value) {
                out.push(Violation::LossOutOfRange {
                    context,
                    state: s,
                    action: a,
                    value,
                });
            }
        }
    }
}

/// Checks every table invariant of `model`. Violations are data, not errors.
pub fn validate_model(model: &CmdpModel) -> ValidationReport {
    let mut violations = Vec::new();
    if let Err(e) = super::model::check_distribution(model.contexts.weights()) {
        violations.push(Violation::ContextWeights(e));
    }
    let n = model.num_contexts();
    for found in [model.losses.len(), model.dynamics.len()] {
        if found != n {
            violations.push(Violation::ContextCount { expected: n, found });
        }
    }
    for (c, losses) in model.losses.iter().enumerate() {
        validate_losses(&model.space, model.num_actions, c, losses, &mut violations);
    }
    for (c, dynamics) in model.dynamics.iter().enumerate() {
        validate_dynamics(&model.space, model.num_actions, c, dynamics, &mut violations);
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::ContextDistribution;

    fn two_layer_model() -> CmdpModel {
        let space = LayeredStateSpace::from_widths(&[1, 2, 1]).unwrap();
        let mut dynamics = Dynamics::zeros(4, 2);
        for a in 0..2 {
            dynamics.row_mut(0, a)[1] = 0.5;
            dynamics.row_mut(0, a)[2] = 0.5;
            dynamics.row_mut(1, a)[3] = 1.0;
            dynamics.row_mut(2, a)[3] = 1.0;
        }
        let losses = Losses::from_means(4, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.0, 0.0]).unwrap();
        CmdpModel {
            space,
            num_actions: 2,
            contexts: ContextDistribution::uniform(1),
            losses: vec![losses],
            dynamics: vec![dynamics],
        }
    }

    #[test]
    fn well_formed_model_passes() {
        assert!(validate_model(&two_layer_model()).is_ok());
    }

    #[test]
    fn short_row_is_named() {
        let mut model = two_layer_model();
        model.dynamics[0].row_mut(0, 1)[2] = 0.4;
        let report = validate_model(&model);
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::TransitionRowSum {
                context,
                state,
                action,
                sum,
            } => {
                assert_eq!((*context, *state, *action), (0, 0, 1));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn same_layer_transition_is_not_loop_free() {
        let mut model = two_layer_model();
        let row = model.dynamics[0].row_mut(1, 0);
        row[3] = 0.0;
        row[2] = 1.0;
        let report = validate_model(&model);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotLoopFree { state: 1, action: 0, next: 2, .. })));
    }

    #[test]
    fn loss_range_and_terminal_loss() {
        let mut model = two_layer_model();
        model.losses[0].set(1, 1, 1.5);
        model.losses[0].set(3, 0, 0.1);
        let report = validate_model(&model);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::LossOutOfRange { state: 1, action: 1, .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::TerminalLoss { action: 0, .. })));
    }

    #[test]
    fn missing_context_tables() {
        let mut model = two_layer_model();
        model.contexts = ContextDistribution::uniform(2);
        let report = validate_model(&model);
        assert_eq!(report.violations.len(), 2);
    }
}
