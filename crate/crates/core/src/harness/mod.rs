//! Experiments: environment generation, the online loop, regret accounting,
//! baselines and post-hoc inequality checks.
//!
//! Randomness comes from three independent ChaCha streams derived from the
//! config seed (environment, contexts, trajectories), so baselines run on the
//! same seed see the same environment and the same context sequence.

mod baselines;
mod config;
mod env;
mod lemmas;
mod regret;
mod run;

pub use baselines::{baseline_known_model, baseline_uniform, evaluate_fixed_policies};
pub use config::ExperimentConfig;
pub use env::{
    generate_environment, random_dynamics, random_losses, random_model, random_policy, Environment,
    DISTRACTOR_FLOOR,
};
pub use lemmas::{lemma_suite, log_sum_check, omd_check, LemmaReport, SuiteResult};
pub use regret::{
    azuma_gap_check, concentration_check, expected_regret, loglog_slope, pseudo_regret, regret_bound,
    regret_bound_terms, AzumaCheck, ConcentrationCheck,
};
pub use run::{
    optimal_values, rng_stream, run_experiment, run_with_environment, Run, RunRecord, CONTEXT_STREAM,
    ENVIRONMENT_STREAM, TRAJECTORY_STREAM,
};
