use rand::Rng;

use super::config::ExperimentConfig;
use super::env::generate_environment;
use super::run::{optimal_values, rng_stream, RunRecord, CONTEXT_STREAM, ENVIRONMENT_STREAM};
use crate::cmdp::{value_backup, CmdpModel, Policy};
use crate::error::{Error, Result};

/// Plays `policies[c]` whenever context `c` is drawn, for `episodes` episodes.
pub fn evaluate_fixed_policies<R: Rng + ?Sized>(
    model: &CmdpModel,
    policies: &[Policy],
    episodes: usize,
    context_rng: &mut R,
) -> Result<Vec<RunRecord>> {
    if policies.len() != model.num_contexts() {
        return Err(Error::DimensionMismatch {
            what: "policies",
            expected: model.num_contexts(),
            found: policies.len(),
        });
    }
    let s1 = model.space.initial_state();
    let optimal: Vec<f64> = optimal_values(model)?.into_iter().map(|(_, v)| v).collect();
    let values = policies
        .iter()
        .enumerate()
        .map(|(c, pi)| Ok(value_backup(&model.space, pi, &model.dynamics[c], &model.losses[c])?.v(s1)))
        .collect::<Result<Vec<f64>>>()?;
    let expected_increment: f64 = (0..model.num_contexts())
        .map(|c| model.contexts.weight(c) * (values[c] - optimal[c]))
        .sum();

    let (mut cum_regret, mut cum_expected) = (0.0, 0.0);
    let mut records = Vec::with_capacity(episodes);
    for episode in 1..=episodes {
        let context = model.contexts.sample(context_rng);
        let increment = values[context] - optimal[context];
        cum_regret += increment;
        cum_expected += expected_increment;
        records.push(RunRecord {
            episode,
            context,
            realized_value: values[context],
            optimal_value: optimal[context],
            regret_increment: increment,
            cum_regret,
            expected_regret_increment: expected_increment,
            cum_expected_regret: cum_expected,
            loss_estimator: None,
            dyn_estimator: None,
            bonus_mass: 0.0,
            sq_err_diag: 0.0,
            hellinger_diag: 0.0,
        });
    }
    Ok(records)
}

/// Uniform policy in every context, on the environment and context sequence
/// that `run_experiment` sees for the same config.
pub fn baseline_uniform(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let env = generate_environment(config, &mut rng_stream(config.seed, ENVIRONMENT_STREAM))?;
    let model = &env.model;
    let policies = vec![Policy::uniform(model.num_states(), model.num_actions); model.num_contexts()];
    evaluate_fixed_policies(model, &policies, config.episodes, &mut rng_stream(config.seed, CONTEXT_STREAM))
}

/// Per-context optimal policy of the true model; zero regret.
pub fn baseline_known_model(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let env = generate_environment(config, &mut rng_stream(config.seed, ENVIRONMENT_STREAM))?;
    let policies: Vec<Policy> = optimal_values(&env.model)?.into_iter().map(|(pi, _)| pi).collect();
    evaluate_fixed_policies(&env.model, &policies, config.episodes, &mut rng_stream(config.seed, CONTEXT_STREAM))
}
