use super::params::AlgoParams;
use super::replay::{
    replay_policy_sequence, stage_bonus, EstimatorHistory, PolicySequenceCache, ReplayInputs,
};
use crate::cmdp::{LayeredStateSpace, Policy, Trajectory};
use crate::error::Result;
use crate::oracles::{DynamicsClass, LeastSquaresOracle, LogLossOracle, LossClass, TrajectoryDataset};

/// One learner instance: the dataset, both oracles, the estimator history
/// and the per-context policy cache.
///
/// ```text
/// let mut agent = OpoCmdp::new(space, num_actions, num_contexts, losses, dynamics, params)?;
/// loop {
///     let c = contexts.sample(rng);
///     let policy = agent.policy(c)?.clone();
///     agent.observe(sample_trajectory(&model, c, &policy, mode, rng)?);
/// }
/// ```
#[derive(Debug, Clone)]
pub struct OpoCmdp {
    space: LayeredStateSpace,
    num_actions: usize,
    loss_class: LossClass,
    dyn_class: DynamicsClass,
    params: AlgoParams,
    dataset: TrajectoryDataset,
    least_squares: LeastSquaresOracle,
    log_loss: LogLossOracle,
    history: EstimatorHistory,
    cache: PolicySequenceCache,
}

impl OpoCmdp {
    pub fn new(
        space: LayeredStateSpace,
        num_actions: usize,
        num_contexts: usize,
        loss_class: LossClass,
        dyn_class: DynamicsClass,
        params: AlgoParams,
    ) -> Result<Self> {
        params.validate()?;
        let least_squares = LeastSquaresOracle::new(&loss_class)?;
        let log_loss = LogLossOracle::new(&dyn_class)?;
        let mut history = EstimatorHistory::new();
        history.push(least_squares.best(), log_loss.best());
        let cache = PolicySequenceCache::new(num_contexts, space.num_states(), num_actions);
        Ok(Self {
            space,
            num_actions,
            loss_class,
            dyn_class,
            params,
            dataset: TrajectoryDataset::new(),
            least_squares,
            log_loss,
            history,
            cache,
        })
    }

    /// 1-based index of the upcoming episode.
    pub fn episode(&self) -> usize {
        self.dataset.len() + 1
    }

    fn inputs(&self) -> ReplayInputs<'_> {
        ReplayInputs {
            space: &self.space,
            loss_class: &self.loss_class,
            dyn_class: &self.dyn_class,
            params: &self.params,
        }
    }

    /// `π^t_c` for the upcoming episode `t`.
    pub fn policy(&mut self, context: usize) -> Result<&Policy> {
        self.policy_at(context, self.episode())
    }

    /// `π^stage_c` for any stage up to the upcoming episode.
    pub fn policy_at(&mut self, context: usize, stage: usize) -> Result<&Policy> {
        let inputs = ReplayInputs {
            space: &self.space,
            loss_class: &self.loss_class,
            dyn_class: &self.dyn_class,
            params: &self.params,
        };
        replay_policy_sequence(&inputs, context, stage, &self.history, &mut self.cache)
    }

    /// Bonus table `b^t_c` of the upcoming episode.
    pub fn current_bonus(&mut self, context: usize) -> Result<Vec<f64>> {
        let stage = self.episode();
        let inputs = ReplayInputs {
            space: &self.space,
            loss_class: &self.loss_class,
            dyn_class: &self.dyn_class,
            params: &self.params,
        };
        stage_bonus(&inputs, context, stage, &self.history, &mut self.cache)
    }

    /// Appends the episode and refits both oracles.
    pub fn observe(&mut self, trajectory: Trajectory) {
        self.least_squares.observe(&self.loss_class, &trajectory);
        self.log_loss.observe(&self.dyn_class, &trajectory);
        self.dataset.push(trajectory);
        self.history.push(self.least_squares.best(), self.log_loss.best());
    }

    /// Estimator pair fitted on all episodes so far.
    pub fn current_estimators(&self) -> (usize, usize) {
        self.history.entry(self.history.len())
    }

    pub fn space(&self) -> &LayeredStateSpace {
        &self.space
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn loss_class(&self) -> &LossClass {
        &self.loss_class
    }

    pub fn dyn_class(&self) -> &DynamicsClass {
        &self.dyn_class
    }

    pub fn dataset(&self) -> &TrajectoryDataset {
        &self.dataset
    }

    pub fn history(&self) -> &EstimatorHistory {
        &self.history
    }

    pub fn cache(&self) -> &PolicySequenceCache {
        &self.cache
    }

    /// Replays `context` on a fresh cache; used to check that cached
    /// prefixes are reproducible from the history alone.
    pub fn replay_from_scratch(&self, context: usize, stage: usize) -> Result<Policy> {
        let mut cache = PolicySequenceCache::new(self.cache.num_contexts(), self.space.num_states(), self.num_actions);
        replay_policy_sequence(&self.inputs(), context, stage, &self.history, &mut cache).cloned()
    }
}
