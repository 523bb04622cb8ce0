use rand::Rng;

use super::config::ExperimentConfig;
use crate::cmdp::{
    validate_model, CmdpModel, ContextDistribution, Dynamics, LayeredStateSpace, Losses, Policy,
};
use crate::error::{Error, Result};
use crate::oracles::{DynamicsClass, LossClass};

/// Probability floor for distractor dynamics, applied before renormalizing.
pub const DISTRACTOR_FLOOR: f64 = 1e-3;

/// A ground-truth model together with realizable function classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub model: CmdpModel,
    pub loss_class: LossClass,
    pub dyn_class: DynamicsClass,
}

/// Uniform `[0, 1]` means on decision states, zero on the terminal state.
pub fn random_losses<R: Rng + ?Sized>(space: &LayeredStateSpace, num_actions: usize, rng: &mut R) -> Losses {
    let mut losses = Losses::zeros(space.num_states(), num_actions);
    for s in space.decision_states() {
        for a in 0..num_actions {
            losses.set(s, a, rng.gen::<f64>());
        }
    }
    losses
}

/// Flat-Dirichlet rows on the next layer. With `floor > 0` every entry of the
/// next layer is raised to at least `floor` and the row renormalized.
pub fn random_dynamics<R: Rng + ?Sized>(
    space: &LayeredStateSpace,
    num_actions: usize,
    floor: f64,
    rng: &mut R,
) -> Dynamics {
    let mut dynamics = Dynamics::zeros(space.num_states(), num_actions);
    for s in space.decision_states() {
        let next_layer = space.layer(space.layer_of(s) + 1);
        for a in 0..num_actions {
            let row = dynamics.row_mut(s, a);
            for &next in next_layer {
                row[next] = -(1.0 - rng.gen::<f64>()).ln();
            }
            let total: f64 = next_layer.iter().map(|&n| row[n]).sum();
            for &next in next_layer {
                row[next] = (row[next] / total).max(floor);
            }
            if floor > 0.0 {
                let total: f64 = next_layer.iter().map(|&n| row[n]).sum();
                for &next in next_layer {
                    row[next] /= total;
                }
            }
        }
    }
    dynamics
}

/// Rows drawn from a flat Dirichlet over actions.
pub fn random_policy<R: Rng + ?Sized>(num_states: usize, num_actions: usize, rng: &mut R) -> Policy {
    let mut probs = Vec::with_capacity(num_states * num_actions);
    for _ in 0..num_states {
        let row: Vec<f64> = (0..num_actions).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = row.iter().sum();
        probs.extend(row.iter().map(|x| x / total));
    }
    Policy::from_rows_unchecked(num_states, num_actions, probs)
}

pub fn random_model<R: Rng + ?Sized>(
    space: &LayeredStateSpace,
    num_actions: usize,
    contexts: ContextDistribution,
    rng: &mut R,
) -> CmdpModel {
    let n = contexts.len();
    let losses = (0..n).map(|_| random_losses(space, num_actions, rng)).collect();
    let dynamics = (0..n).map(|_| random_dynamics(space, num_actions, 0.0, rng)).collect();
    CmdpModel {
        space: space.clone(),
        num_actions,
        contexts,
        losses,
        dynamics,
    }
}

/// Random model plus loss and dynamics classes that contain the truth at a
/// seed-determined position among independently drawn distractors.
pub fn generate_environment<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<Environment> {
    config.validate()?;
    let space = LayeredStateSpace::from_widths(&config.layer_widths)?;
    let model = random_model(&space, config.num_actions, config.context_distribution()?, rng);
    let n = model.num_contexts();

    let loss_truth = rng.gen_range(0..config.loss_class_size);
    let loss_candidates = (0..config.loss_class_size)
        .map(|i| {
            if i == loss_truth {
                model.losses.clone()
            } else {
                (0..n).map(|_| random_losses(&space, config.num_actions, rng)).collect()
            }
        })
        .collect();

    let dyn_truth = rng.gen_range(0..config.dyn_class_size);
    let dyn_candidates = (0..config.dyn_class_size)
        .map(|i| {
            if i == dyn_truth {
                model.dynamics.clone()
            } else {
                (0..n)
                    .map(|_| random_dynamics(&space, config.num_actions, DISTRACTOR_FLOOR, rng))
                    .collect()
            }
        })
        .collect();

    let env = Environment {
        loss_class: LossClass::new(loss_candidates, loss_truth)?,
        dyn_class: DynamicsClass::new(dyn_candidates, dyn_truth)?,
        model,
    };
    for report in [
        validate_model(&env.model),
        env.loss_class.validate(&env.model),
        env.dyn_class.validate(&env.model),
    ] {
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidModel(v.to_string()));
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_stream;

    #[test]
    fn singleton_classes_hold_the_truth() {
        let config = ExperimentConfig {
            loss_class_size: 1,
            dyn_class_size: 1,
            ..ExperimentConfig::standard(4)
        };
        let env = generate_environment(&config, &mut rng_stream(4, 0)).unwrap();
        assert_eq!(env.loss_class.candidates(), std::slice::from_ref(&env.model.losses));
        assert_eq!(env.dyn_class.candidates(), std::slice::from_ref(&env.model.dynamics));
    }

    #[test]
    fn generated_environments_are_valid_and_realizable() {
        for seed in 0..20 {
            let env = generate_environment(&ExperimentConfig::standard(seed), &mut rng_stream(seed, 0)).unwrap();
            assert!(validate_model(&env.model).is_ok());
            assert!(env.loss_class.is_realizable(&env.model));
            assert!(env.dyn_class.is_realizable(&env.model));
            assert_eq!(env.loss_class.len(), 8);
        }
    }

    #[test]
    fn same_seed_same_environment() {
        let config = ExperimentConfig::standard(9);
        let a = generate_environment(&config, &mut rng_stream(9, 0)).unwrap();
        let b = generate_environment(&config, &mut rng_stream(9, 0)).unwrap();
        let c = generate_environment(&config, &mut rng_stream(10, 0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn distractor_floor_is_respected() {
        let space = LayeredStateSpace::from_widths(&[1, 4, 1]).unwrap();
        let p = random_dynamics(&space, 3, DISTRACTOR_FLOOR, &mut rng_stream(1, 0));
        for a in 0..3 {
            let row = &p.row(0, a)[1..5];
            assert!(row.iter().all(|&x| x >= DISTRACTOR_FLOOR * 0.99));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}
