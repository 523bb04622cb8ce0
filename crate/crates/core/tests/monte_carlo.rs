//! Exact quantities against rollout estimates.

mod common;

use common::random_instance;
use opo_cmdp::cmdp::{
    hellinger_sq, occupancy_measures, sample_trajectory, CmdpModel, ContextDistribution, Dynamics, LayeredStateSpace,
    LossMode, Losses, Policy,
};
use opo_cmdp::harness::{random_dynamics, random_losses, random_policy, rng_stream};
use opo_cmdp::oracles::{hellinger_diagnostic, squared_error_diagnostic};

const ROLLOUTS: usize = 100_000;
const SIGMAS: f64 = 3.0;

#[test]
fn occupancy_matches_visit_frequencies() {
    let mut rng = rng_stream(21, 0);
    let inst = random_instance(&mut rng, &[1, 2, 3, 1], 2);
    let model = inst.model();
    let q = occupancy_measures(&inst.space, &inst.policy, &inst.dynamics).unwrap();
    let mut counts = vec![0usize; inst.space.num_states() * 2];
    for _ in 0..ROLLOUTS {
        let traj = sample_trajectory(&model, 0, &inst.policy, LossMode::Deterministic, &mut rng).unwrap();
        for step in &traj.steps {
            counts[step.state * 2 + step.action] += 1;
        }
    }
    for s in inst.space.decision_states() {
        for a in 0..2 {
            let p = q.get(s, a);
            let freq = counts[s * 2 + a] as f64 / ROLLOUTS as f64;
            let se = (p * (1.0 - p) / ROLLOUTS as f64).sqrt();
            assert!((freq - p).abs() <= SIGMAS * se, "({s},{a}): {freq} vs {p}");
        }
    }
}

#[test]
fn bernoulli_losses_concentrate() {
    let space = LayeredStateSpace::from_widths(&[1, 1]).unwrap();
    let model = CmdpModel {
        space: space.clone(),
        num_actions: 1,
        contexts: ContextDistribution::uniform(1),
        losses: vec![Losses::from_means(2, 1, vec![0.3, 0.0]).unwrap()],
        dynamics: vec![Dynamics::deterministic(&space, 1, &[1, 1]).unwrap()],
    };
    let policy = Policy::uniform(2, 1);
    let mut rng = rng_stream(22, 0);
    let total: f64 = (0..ROLLOUTS)
        .map(|_| sample_trajectory(&model, 0, &policy, LossMode::Bernoulli, &mut rng).unwrap().steps[0].loss)
        .sum();
    let sigma = (0.3f64 * 0.7 / ROLLOUTS as f64).sqrt();
    assert!((total / ROLLOUTS as f64 - 0.3).abs() <= SIGMAS * sigma);
}

/// Sample mean and variance of `f` over rollouts of `policy` in `context`.
fn rollout_moments(
    model: &CmdpModel,
    context: usize,
    policy: &Policy,
    f: impl Fn(usize, usize) -> f64,
    seed: u64,
) -> (f64, f64) {
    let mut rng = rng_stream(seed, 0);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..ROLLOUTS {
        let traj = sample_trajectory(model, context, policy, LossMode::Deterministic, &mut rng).unwrap();
        let x: f64 = traj.steps.iter().map(|st| f(st.state, st.action)).sum();
        sum += x;
        sum_sq += x * x;
    }
    let n = ROLLOUTS as f64;
    let mean = sum / n;
    (mean, (sum_sq / n - mean * mean) * n / (n - 1.0))
}

struct Setup {
    model: CmdpModel,
    policies: Vec<Vec<Policy>>,
    f_hat: Vec<Losses>,
    p_hat: Vec<Dynamics>,
}

fn setup() -> Setup {
    let space = LayeredStateSpace::from_widths(&[1, 2, 2, 1]).unwrap();
    let mut rng = rng_stream(23, 0);
    let contexts = ContextDistribution::new(vec![0.3, 0.7]).unwrap();
    let model = CmdpModel {
        space: space.clone(),
        num_actions: 2,
        contexts,
        losses: (0..2).map(|_| random_losses(&space, 2, &mut rng)).collect(),
        dynamics: (0..2).map(|_| random_dynamics(&space, 2, 0.0, &mut rng)).collect(),
    };
    let policies = (0..2)
        .map(|_| (0..2).map(|_| random_policy(space.num_states(), 2, &mut rng)).collect())
        .collect();
    let f_hat = (0..2).map(|_| random_losses(&space, 2, &mut rng)).collect();
    let p_hat = (0..2).map(|_| random_dynamics(&space, 2, 0.0, &mut rng)).collect();
    Setup {
        model,
        policies,
        f_hat,
        p_hat,
    }
}

/// Combines per-(context, policy) rollout moments into the weighted sum and
/// its standard error.
fn combine(setup: &Setup, f: impl Fn(usize, usize, usize) -> f64) -> (f64, f64) {
    let (mut mean, mut var) = (0.0, 0.0);
    for c in 0..2 {
        let w = setup.model.contexts.weight(c);
        for (i, policy) in setup.policies[c].iter().enumerate() {
            let (m, v) = rollout_moments(&setup.model, c, policy, |s, a| f(c, s, a), 100 + (2 * c + i) as u64);
            mean += w * m;
            var += w * w * v / ROLLOUTS as f64;
        }
    }
    (mean, var.sqrt())
}

#[test]
fn squared_error_diagnostic_matches_rollouts() {
    let setup = setup();
    let exact = squared_error_diagnostic(&setup.f_hat, &setup.model.losses, &setup.policies, &setup.model).unwrap();
    let (estimate, se) = combine(&setup, |c, s, a| {
        (setup.f_hat[c].mean(s, a) - setup.model.losses[c].mean(s, a)).powi(2)
    });
    assert!((exact - estimate).abs() <= SIGMAS * se, "{exact} vs {estimate} ± {se}");
}

#[test]
fn hellinger_diagnostic_matches_rollouts() {
    let setup = setup();
    let exact = hellinger_diagnostic(&setup.p_hat, &setup.model.dynamics, &setup.policies, &setup.model).unwrap();
    let (estimate, se) = combine(&setup, |c, s, a| {
        hellinger_sq(setup.model.dynamics[c].row(s, a), setup.p_hat[c].row(s, a)).unwrap()
    });
    assert!((exact - estimate).abs() <= SIGMAS * se, "{exact} vs {estimate} ± {se}");
}
