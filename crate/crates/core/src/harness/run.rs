use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::env::{generate_environment, Environment};
use crate::cmdp::{occupancy_measures, optimal_policy, sample_trajectory, value_backup, CmdpModel, OccupancyMeasure, Policy};
use crate::error::Result;
use crate::opo::{default_parameters, AlgoParams, OpoCmdp};
use crate::oracles::{weighted_hellinger_error, weighted_squared_error};

pub const ENVIRONMENT_STREAM: u64 = 0;
pub const CONTEXT_STREAM: u64 = 1;
pub const TRAJECTORY_STREAM: u64 = 2;

/// Independent ChaCha stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Metrics of one episode. All values are exact expectations, not sampled
/// returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// 1-based.
    pub episode: usize,
    pub context: usize,
    /// `V^{π^t_c}_c(s₁)` under the true model.
    pub realized_value: f64,
    /// `V^{π*_c}_c(s₁)`.
    pub optimal_value: f64,
    pub regret_increment: f64,
    pub cum_regret: f64,
    /// `E_{c∼𝒟}[V^{π^t_c}_c(s₁) − V^{π*_c}_c(s₁)]`.
    pub expected_regret_increment: f64,
    pub cum_expected_regret: f64,
    pub loss_estimator: Option<usize>,
    pub dyn_estimator: Option<usize>,
    /// `Σ_{s,a} q(s,a | π^t_c, P*_c)·b^t_c(s,a)` for the observed context.
    pub bonus_mass: f64,
    /// `E_c[Σ_{i<t} E_{π^i_c,P*_c}[Σ_h (f̂^t_c − f*_c)²]]`.
    pub sq_err_diag: f64,
    /// `E_c[Σ_{i<t} E_{π^i_c,P*_c}[Σ_h D²_H(P*_c, P̂^t_c)]]`.
    pub hellinger_diag: f64,
}

/// A finished learner run together with everything the post-hoc checks read.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: ExperimentConfig,
    pub env: Environment,
    pub agent: OpoCmdp,
    /// `V*_c(s₁)` per context.
    pub optimal_values: Vec<f64>,
    /// `q(·|π^t_c, P*_c)` for every context and episode `t`.
    pub true_occupancies: Vec<Vec<OccupancyMeasure>>,
    pub records: Vec<RunRecord>,
}

/// Optimal policy and `V*(s₁)` of every context.
pub fn optimal_values(model: &CmdpModel) -> Result<Vec<(Policy, f64)>> {
    (0..model.num_contexts())
        .map(|c| {
            let (policy, values) = optimal_policy(&model.space, &model.dynamics[c], &model.losses[c])?;
            Ok((policy, values.v(model.space.initial_state())))
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Run> {
    let env = generate_environment(config, &mut rng_stream(config.seed, ENVIRONMENT_STREAM))?;
    let params = default_parameters(
        config.episodes,
        config.horizon,
        config.num_states(),
        config.num_actions,
        (config.loss_class_size, config.dyn_class_size),
        config.delta,
    )?
    .with_bonus_scale(config.bonus_scale);
    run_with_environment(config, env, params)
}

/// Runs the learner on a given environment; `config` supplies the episode
/// count, loss mode and seed.
pub fn run_with_environment(config: &ExperimentConfig, env: Environment, params: AlgoParams) -> Result<Run> {
    let model = &env.model;
    let space = &model.space;
    let s1 = space.initial_state();
    let num_contexts = model.num_contexts();
    let mut agent = OpoCmdp::new(
        space.clone(),
        model.num_actions,
        num_contexts,
        env.loss_class.clone(),
        env.dyn_class.clone(),
        params,
    )?;
    let optimal: Vec<f64> = optimal_values(model)?.into_iter().map(|(_, v)| v).collect();

    let mut context_rng = rng_stream(config.seed, CONTEXT_STREAM);
    let mut trajectory_rng = rng_stream(config.seed, TRAJECTORY_STREAM);
    let mut cum_occupancy = vec![OccupancyMeasure::zeros(space.num_states(), model.num_actions); num_contexts];
    let mut true_occupancies: Vec<Vec<OccupancyMeasure>> = vec![Vec::with_capacity(config.episodes); num_contexts];
    let mut records = Vec::with_capacity(config.episodes);
    let (mut cum_regret, mut cum_expected) = (0.0, 0.0);

    for episode in 1..=config.episodes {
        let context = model.contexts.sample(&mut context_rng);
        let (loss_index, dyn_index) = agent.current_estimators();

        // The diagnostics average over every context, so all sequences are
        // advanced to the current stage, not only the observed one.
        let mut policies = Vec::with_capacity(num_contexts);
        let mut values = Vec::with_capacity(num_contexts);
        let mut occupancies = Vec::with_capacity(num_contexts);
        for c in 0..num_contexts {
            let policy = agent.policy(c)?.clone();
            values.push(value_backup(space, &policy, &model.dynamics[c], &model.losses[c])?.v(s1));
            occupancies.push(occupancy_measures(space, &policy, &model.dynamics[c])?);
            policies.push(policy);
        }

        let f_hat = env.loss_class.get(loss_index);
        let p_hat = env.dyn_class.get(dyn_index);
        let mut sq_err_diag = 0.0;
        let mut hellinger_diag = 0.0;
        let mut expected_increment = 0.0;
        for c in 0..num_contexts {
            let w = model.contexts.weight(c);
            sq_err_diag += w * weighted_squared_error(&cum_occupancy[c], &f_hat[c], &model.losses[c]);
            hellinger_diag += w * weighted_hellinger_error(model, &cum_occupancy[c], &p_hat[c], &model.dynamics[c]);
            expected_increment += w * (values[c] - optimal[c]);
        }

        let bonus = agent.current_bonus(context)?;
        let bonus_mass: f64 = occupancies[context].as_slice().iter().zip(&bonus).map(|(q, b)| q * b).sum();

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
            loss_estimator: Some(loss_index),
            dyn_estimator: Some(dyn_index),
            bonus_mass,
            sq_err_diag,
            hellinger_diag,
        });

        let trajectory = sample_trajectory(model, context, &policies[context], config.loss_mode, &mut trajectory_rng)?;
        agent.observe(trajectory);
        for (c, occupancy) in occupancies.into_iter().enumerate() {
            cum_occupancy[c].accumulate(&occupancy);
            true_occupancies[c].push(occupancy);
        }
    }

    // Materialize the final stage so post-hoc checks see all T backups.
    for c in 0..num_contexts {
        agent.policy(c)?;
    }

    Ok(Run {
        config: config.clone(),
        env,
        agent,
        optimal_values: optimal,
        true_occupancies,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::Policy;

    fn small(seed: u64, episodes: usize) -> ExperimentConfig {
        ExperimentConfig {
            episodes,
            num_contexts: 2,
            loss_class_size: 3,
            dyn_class_size: 3,
            bonus_scale: 1e-3,
            ..ExperimentConfig::standard(seed)
        }
    }

    #[test]
    fn first_episode_plays_uniform() {
        let run = run_experiment(&small(1, 1)).unwrap();
        let record = &run.records[0];
        let model = &run.env.model;
        let c = record.context;
        let uniform = Policy::uniform(model.num_states(), model.num_actions);
        let v = value_backup(&model.space, &uniform, &model.dynamics[c], &model.losses[c]).unwrap().v(0);
        assert_eq!(record.realized_value, v);
        assert!(record.regret_increment >= 0.0);
        assert_eq!(record.regret_increment, v - run.optimal_values[c]);
        assert_eq!(record.sq_err_diag, 0.0);
        assert_eq!(record.hellinger_diag, 0.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_experiment(&small(3, 60)).unwrap();
        let b = run_experiment(&small(3, 60)).unwrap();
        assert_eq!(a.records, b.records);
        let c = run_experiment(&small(4, 60)).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn cumulative_fields_are_consistent() {
        let run = run_experiment(&small(5, 80)).unwrap();
        let mut cum = 0.0;
        for r in &run.records {
            assert!(r.regret_increment >= -crate::COMPUTED_TOL);
            assert!(r.expected_regret_increment >= -crate::COMPUTED_TOL);
            cum += r.regret_increment;
            assert_eq!(r.cum_regret, cum);
        }
    }

    #[test]
    fn cached_policies_replay_from_history() {
        let run = run_experiment(&small(6, 40)).unwrap();
        for c in 0..2 {
            let cached = &run.agent.cache().policies(c)[39];
            assert_eq!(&run.agent.replay_from_scratch(c, 40).unwrap(), cached);
        }
    }
}
