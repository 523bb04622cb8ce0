use rayon::prelude::*;

use super::class::{DynamicsClass, LossClass, TrajectoryDataset};
use crate::cmdp::{DynamicsTable, LossTable, Trajectory};
use crate::error::{Error, Result};

/// Classes at least this large are scored on the rayon pool.
const PARALLEL_SCORING_MIN: usize = 32;

/// `Σ_h (f_c(s_h, a_h) − ℓ_h)²` for one episode.
pub fn episode_squared_error(candidate: &LossTable, trajectory: &Trajectory) -> f64 {
    let losses = &candidate[trajectory.context];
    trajectory
        .steps
        .iter()
        .map(|step| {
            let d = losses.mean(step.state, step.action) - step.loss;
            d * d
        })
        .sum()
}

/// `Σ_h log P_c(s_{h+1} | s_h, a_h)` for one episode; `-∞` if any observed
/// transition has probability zero.
pub fn episode_log_likelihood(candidate: &DynamicsTable, trajectory: &Trajectory) -> f64 {
    let dynamics = &candidate[trajectory.context];
    trajectory
        .transitions()
        .map(|(s, a, next)| dynamics.prob(s, a, next).ln())
        .sum()
}

/// Smallest index attaining the minimum.
fn argmin_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in scores.iter().enumerate().skip(1) {
        if x < scores[best] {
            best = i;
        }
    }
    best
}

/// Smallest index attaining the maximum. `-∞` ranks below every finite
/// score; if every candidate is `-∞` the result is index 0.
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in scores.iter().enumerate().skip(1) {
        if x > scores[best] {
            best = i;
        }
    }
    best
}

fn accumulate<T: Sync>(totals: &mut [f64], candidates: &[T], score: impl Fn(&T) -> f64 + Sync + Send) {
    if candidates.len() >= PARALLEL_SCORING_MIN {
        totals
            .par_iter_mut()
            .zip(candidates.par_iter())
            .for_each(|(total, candidate)| *total += score(candidate));
    } else {
        for (total, candidate) in totals.iter_mut().zip(candidates) {
            *total += score(candidate);
        }
    }
}

/// Least-squares regression over the finite loss class.
pub fn least_squares_fit(dataset: &TrajectoryDataset, class: &LossClass) -> Result<usize> {
    let mut oracle = LeastSquaresOracle::new(class)?;
    for trajectory in dataset.iter() {
        oracle.observe(class, trajectory);
    }
    Ok(oracle.best())
}

/// Maximum-likelihood (log-loss) regression over the finite dynamics class.
pub fn log_loss_fit(dataset: &TrajectoryDataset, class: &DynamicsClass) -> Result<usize> {
    let mut oracle = LogLossOracle::new(class)?;
    for trajectory in dataset.iter() {
        oracle.observe(class, trajectory);
    }
    Ok(oracle.best())
}

/// Running squared-error totals, one per loss candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresOracle {
    totals: Vec<f64>,
}

impl LeastSquaresOracle {
    pub fn new(class: &LossClass) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(Self {
            totals: vec![0.0; class.len()],
        })
    }

    pub fn observe(&mut self, class: &LossClass, trajectory: &Trajectory) {
        accumulate(&mut self.totals, class.candidates(), |f| episode_squared_error(f, trajectory));
    }

    pub fn best(&self) -> usize {
        argmin_first(&self.totals)
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }
}

/// Running log-likelihood totals, one per dynamics candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLossOracle {
    totals: Vec<f64>,
}

impl LogLossOracle {
    pub fn new(class: &DynamicsClass) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(Self {
            totals: vec![0.0; class.len()],
        })
    }

    pub fn observe(&mut self, class: &DynamicsClass, trajectory: &Trajectory) {
        accumulate(&mut self.totals, class.candidates(), |p| episode_log_likelihood(p, trajectory));
    }

    pub fn best(&self) -> usize {
        argmax_first(&self.totals)
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::{Dynamics, LayeredStateSpace, Losses, Step};

    fn one_step_space() -> LayeredStateSpace {
        LayeredStateSpace::from_widths(&[1, 2, 1]).unwrap()
    }

    fn loss_with(value: f64) -> LossTable {
        let mut l = Losses::zeros(4, 1);
        l.set(0, 0, value);
        vec![l]
    }

    fn dynamics_with(p_to_1: f64) -> DynamicsTable {
        let space = one_step_space();
        let mut p = Dynamics::zeros(4, 1);
        p.row_mut(0, 0)[1] = p_to_1;
        p.row_mut(0, 0)[2] = 1.0 - p_to_1;
        for s in [1, 2] {
            p.row_mut(s, 0)[space.terminal_state()] = 1.0;
        }
        vec![p]
    }

    fn trajectory(loss: f64) -> Trajectory {
        Trajectory {
            context: 0,
            steps: vec![
                Step { state: 0, action: 0, loss },
                Step { state: 1, action: 0, loss: 0.0 },
            ],
            terminal: 3,
        }
    }

    #[test]
    fn empty_dataset_returns_first_index() {
        let losses = LossClass::new(vec![loss_with(0.2), loss_with(0.9)], 1).unwrap();
        let dynamics = DynamicsClass::new(vec![dynamics_with(0.1), dynamics_with(0.9)], 1).unwrap();
        let empty = TrajectoryDataset::new();
        assert_eq!(least_squares_fit(&empty, &losses).unwrap(), 0);
        assert_eq!(log_loss_fit(&empty, &dynamics).unwrap(), 0);
    }

    #[test]
    fn least_squares_picks_closer_candidate() {
        let class = LossClass::new(vec![loss_with(0.2), loss_with(0.9)], 1).unwrap();
        let data: TrajectoryDataset = [trajectory(1.0)].into_iter().collect();
        assert_eq!(least_squares_fit(&data, &class).unwrap(), 1);
        let mut oracle = LeastSquaresOracle::new(&class).unwrap();
        oracle.observe(&class, &data.as_slice()[0]);
        assert!((oracle.totals()[0] - 0.64).abs() < 1e-15);
        assert!((oracle.totals()[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn singleton_class_always_zero() {
        let class = LossClass::new(vec![loss_with(0.5)], 0).unwrap();
        let data: TrajectoryDataset = [trajectory(1.0), trajectory(0.0)].into_iter().collect();
        assert_eq!(least_squares_fit(&data, &class).unwrap(), 0);
    }

    #[test]
    fn log_loss_prefers_likelier_transition() {
        let class = DynamicsClass::new(vec![dynamics_with(0.9), dynamics_with(0.1)], 0).unwrap();
        let data: TrajectoryDataset = [trajectory(0.0)].into_iter().collect();
        assert_eq!(log_loss_fit(&data, &class).unwrap(), 0);
        let class = DynamicsClass::new(vec![dynamics_with(0.1), dynamics_with(0.9)], 1).unwrap();
        assert_eq!(log_loss_fit(&data, &class).unwrap(), 1);
    }

    #[test]
    fn zero_probability_candidate_is_excluded() {
        let class = DynamicsClass::new(vec![dynamics_with(0.0), dynamics_with(0.5)], 1).unwrap();
        let data: TrajectoryDataset = [trajectory(0.0)].into_iter().collect();
        let mut oracle = LogLossOracle::new(&class).unwrap();
        oracle.observe(&class, &data.as_slice()[0]);
        assert_eq!(oracle.totals()[0], f64::NEG_INFINITY);
        assert_eq!(oracle.best(), 1);
    }

    #[test]
    fn all_impossible_falls_back_to_first() {
        assert_eq!(argmax_first(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), 0);
        assert_eq!(argmin_first(&[1.0, 0.5, 0.5]), 1);
        assert_eq!(argmax_first(&[-3.0, -1.0, -1.0]), 1);
    }

    #[test]
    fn empty_class_is_an_error() {
        assert_eq!(LossClass::new(vec![], 0).unwrap_err(), Error::EmptyClass);
        assert!(DynamicsClass::new(vec![dynamics_with(0.5)], 1).is_err());
    }
}
