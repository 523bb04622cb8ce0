use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dp::check_policy;
use super::model::{CmdpModel, Policy};
use crate::error::Result;

/// How an observed loss is drawn around its mean `ℓ(s,a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    /// `Bernoulli(ℓ(s,a))`.
    #[default]
    Bernoulli,
    /// The mean itself; consumes no randomness.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub loss: f64,
}

/// One episode: `H` steps followed by the terminal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub context: usize,
    pub steps: Vec<Step>,
    pub terminal: usize,
}

impl Trajectory {
    /// State reached after step `h` (zero-based).
    pub fn next_state(&self, h: usize) -> usize {
        self.steps.get(h + 1).map_or(self.terminal, |s| s.state)
    }

    /// `(s_h, a_h, s_{h+1})` triples.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.steps
            .iter()
            .enumerate()
            .map(|(h, step)| (step.state, step.action, self.next_state(h)))
    }
}

/// Inverse-CDF draw from a (possibly unnormalized by rounding) weight vector.
///
/// Falls back to the last index with positive weight when rounding leaves the
/// uniform draw above the cumulative total.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Executes `policy` in `context` of `model` for one episode.
pub fn sample_trajectory<R: Rng + ?Sized>(
    model: &CmdpModel,
    context: usize,
    policy: &Policy,
    mode: LossMode,
    rng: &mut R,
) -> Result<Trajectory> {
    model.check_context(context)?;
    check_policy(&model.space, model.num_actions, policy)?;
    let dynamics = &model.dynamics[context];
    let losses = &model.losses[context];

    let mut state = model.space.initial_state();
    let mut steps = Vec::with_capacity(model.horizon());
    for _ in 0..model.horizon() {
        let action = sample_index(policy.row(state), rng);
        let mean = losses.mean(state, action);
        let loss = match mode {
            LossMode::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            LossMode::Deterministic => mean,
        };
        steps.push(Step { state, action, loss });
        state = sample_index(dynamics.row(state, action), rng);
    }
    Ok(Trajectory {
        context,
        steps,
        terminal: state,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::cmdp::{ContextDistribution, Dynamics, LayeredStateSpace, Losses};

    fn chain_model() -> CmdpModel {
        let space = LayeredStateSpace::from_widths(&[1, 2, 1]).unwrap();
        let dynamics = Dynamics::deterministic(&space, 2, &[1, 2, 3, 3, 3, 3, 0, 0]).unwrap();
        let losses = Losses::from_means(4, 2, vec![0.3, 0.9, 0.1, 0.2, 0.4, 0.8, 0.0, 0.0]).unwrap();
        CmdpModel {
            space,
            num_actions: 2,
            contexts: ContextDistribution::uniform(1),
            losses: vec![losses],
            dynamics: vec![dynamics],
        }
    }

    #[test]
    fn fully_deterministic_episode() {
        let model = chain_model();
        let policy = Policy::deterministic(2, &[1, 0, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let traj = sample_trajectory(&model, 0, &policy, LossMode::Deterministic, &mut rng).unwrap();
        assert_eq!(
            traj.steps,
            vec![
                Step { state: 0, action: 1, loss: 0.9 },
                Step { state: 2, action: 1, loss: 0.8 },
            ]
        );
        assert_eq!(traj.terminal, 3);
        assert_eq!(traj.transitions().collect::<Vec<_>>(), vec![(0, 1, 2), (2, 1, 3)]);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let model = chain_model();
        let policy = Policy::uniform(4, 2);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| sample_trajectory(&model, 0, &policy, LossMode::Bernoulli, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn bernoulli_losses_are_binary() {
        let model = chain_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traj = sample_trajectory(&model, 0, &Policy::uniform(4, 2), LossMode::Bernoulli, &mut rng).unwrap();
        assert!(traj.steps.iter().all(|s| s.loss == 0.0 || s.loss == 1.0));
    }

    #[test]
    fn bad_context_is_rejected() {
        let model = chain_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(sample_trajectory(&model, 1, &Policy::uniform(4, 2), LossMode::Bernoulli, &mut rng).is_err());
    }

    #[test]
    fn sample_index_skips_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }
}
