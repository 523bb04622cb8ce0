use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use super::backup::{optimistic_backup, policy_improve, OptimisticValues};
use super::bonus::{combined_bonus, exploration_bonus};
use super::params::AlgoParams;
use crate::cmdp::{occupancy_measures, LayeredStateSpace, Policy};
use crate::error::{Error, Result};
use crate::oracles::{DynamicsClass, LossClass};

const EMPTY_FINGERPRINT: u64 = 0x6f70_6f2d_636d_6470;

/// Estimator indices in round order. Entry `k` (1-based) is the pair fitted
/// on episodes `1..k−1`; entry 1 is the empty-dataset fit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EstimatorHistory {
    loss_idx: Vec<usize>,
    dyn_idx: Vec<usize>,
    fingerprints: Vec<u64>,
}

impl EstimatorHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, loss_index: usize, dyn_index: usize) {
        let mut hasher = DefaultHasher::new();
        self.fingerprint(self.len()).hash(&mut hasher);
        (loss_index, dyn_index).hash(&mut hasher);
        self.fingerprints.push(hasher.finish());
        self.loss_idx.push(loss_index);
        self.dyn_idx.push(dyn_index);
    }

    pub fn len(&self) -> usize {
        self.loss_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss_idx.is_empty()
    }

    /// `(loss index, dynamics index)` of round `stage` (1-based).
    pub fn entry(&self, stage: usize) -> (usize, usize) {
        (self.loss_idx[stage - 1], self.dyn_idx[stage - 1])
    }

    pub fn loss_indices(&self) -> &[usize] {
        &self.loss_idx
    }

    pub fn dyn_indices(&self) -> &[usize] {
        &self.dyn_idx
    }

    /// Chained hash of the first `n` entries.
    pub fn fingerprint(&self, n: usize) -> u64 {
        if n == 0 {
            EMPTY_FINGERPRINT
        } else {
            self.fingerprints[n - 1]
        }
    }
}

/// What stage `k` of one context computed on the way from `π^k` to `π^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    /// `(loss index, dynamics index)` used at this stage.
    pub estimators: (usize, usize),
    /// Combined bonus `b^k(s,a)`, `[s][a]`.
    pub bonus: Vec<f64>,
    pub values: OptimisticValues,
}

/// `Σ_{i<count} q(·|π^i, P̂_j)` for one dynamics candidate `j`, summed in
/// policy order.
#[derive(Debug, Clone, PartialEq)]
struct RunningOccupancy {
    count: usize,
    sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct ContextSequence {
    policies: Vec<Policy>,
    stages: Vec<StageRecord>,
    fingerprint: u64,
    occupancy: BTreeMap<usize, RunningOccupancy>,
}

/// Per-context policy prefixes `π¹_c … π^m_c` plus the counterfactual
/// occupancy sums needed to extend them.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySequenceCache {
    sequences: Vec<ContextSequence>,
}

impl PolicySequenceCache {
    pub fn new(num_contexts: usize, num_states: usize, num_actions: usize) -> Self {
        let fresh = ContextSequence {
            policies: vec![Policy::uniform(num_states, num_actions)],
            stages: Vec::new(),
            fingerprint: EMPTY_FINGERPRINT,
            occupancy: BTreeMap::new(),
        };
        Self {
            sequences: vec![fresh; num_contexts],
        }
    }

    pub fn num_contexts(&self) -> usize {
        self.sequences.len()
    }

    /// Cached `π¹_c … π^m_c`.
    pub fn policies(&self, context: usize) -> &[Policy] {
        &self.sequences[context].policies
    }

    /// Cached stages `1 … m−1`.
    pub fn stages(&self, context: usize) -> &[StageRecord] {
        &self.sequences[context].stages
    }
}

/// Everything a replay reads besides the history and the cache.
#[derive(Debug, Clone, Copy)]
pub struct ReplayInputs<'a> {
    pub space: &'a LayeredStateSpace,
    pub loss_class: &'a LossClass,
    pub dyn_class: &'a DynamicsClass,
    pub params: &'a AlgoParams,
}

fn sequence_mut<'c>(
    cache: &'c mut PolicySequenceCache,
    context: usize,
    history: &EstimatorHistory,
) -> Result<&'c mut ContextSequence> {
    let num_contexts = cache.num_contexts();
    let seq = cache
        .sequences
        .get_mut(context)
        .ok_or(Error::ContextOutOfRange { context, num_contexts })?;
    let done = seq.stages.len();
    if history.len() < done || history.fingerprint(done) != seq.fingerprint {
        return Err(Error::InconsistentCache { context });
    }
    Ok(seq)
}

/// Combined bonus table at `stage` from the first `stage − 1` policies of
/// `seq`, evaluated under dynamics candidate `dyn_index`.
fn bonus_table(
    inputs: &ReplayInputs<'_>,
    seq: &mut ContextSequence,
    context: usize,
    stage: usize,
    dyn_index: usize,
) -> Result<Vec<f64>> {
    let space = inputs.space;
    let num_actions = seq.policies[0].num_actions();
    let p_hat = &inputs.dyn_class.get(dyn_index)[context];
    let running = seq.occupancy.entry(dyn_index).or_insert_with(|| RunningOccupancy {
        count: 0,
        sum: vec![0.0; space.num_states() * num_actions],
    });
    while running.count < stage - 1 {
        let q = occupancy_measures(space, &seq.policies[running.count], p_hat)?;
        for (acc, x) in running.sum.iter_mut().zip(q.as_slice()) {
            *acc += x;
        }
        running.count += 1;
    }
    // `stage - 1` never decreases for a given context, so the running sum
    // can only be behind, never ahead.
    debug_assert_eq!(running.count, stage - 1);

    let params = inputs.params;
    let beta_loss = params.beta_loss * params.bonus_scale;
    let beta_dyn = params.beta_dyn * params.bonus_scale;
    let horizon = space.horizon();
    let mut bonus = vec![0.0; running.sum.len()];
    for s in space.decision_states() {
        for a in 0..num_actions {
            let n = running.sum[s * num_actions + a];
            bonus[s * num_actions + a] =
                combined_bonus(exploration_bonus(beta_loss, n), exploration_bonus(beta_dyn, n), horizon);
        }
    }
    Ok(bonus)
}

fn extend_to(
    inputs: &ReplayInputs<'_>,
    context: usize,
    target: usize,
    history: &EstimatorHistory,
    seq: &mut ContextSequence,
) -> Result<()> {
    if target >= 2 && history.len() < target - 1 {
        return Err(Error::HistoryTooShort {
            stage: target,
            needed: target - 1,
            available: history.len(),
        });
    }
    while seq.policies.len() < target {
        let stage = seq.policies.len();
        let (loss_index, dyn_index) = history.entry(stage);
        let bonus = bonus_table(inputs, seq, context, stage, dyn_index)?;
        let current = &seq.policies[stage - 1];
        let values = optimistic_backup(
            inputs.space,
            &inputs.loss_class.get(loss_index)[context],
            &inputs.dyn_class.get(dyn_index)[context],
            &bonus,
            current,
        )?;
        let next = policy_improve(current, &values, inputs.params.eta)?;
        seq.policies.push(next);
        seq.stages.push(StageRecord {
            estimators: (loss_index, dyn_index),
            bonus,
            values,
        });
        seq.fingerprint = history.fingerprint(stage);
    }
    Ok(())
}

/// Returns `π^stage_context`, extending the cached prefix as needed.
///
/// The result depends only on the context, the stage, the first
/// `stage − 1` history entries and the inputs, never on which prefixes were
/// cached before.
pub fn replay_policy_sequence<'c>(
    inputs: &ReplayInputs<'_>,
    context: usize,
    stage: usize,
    history: &EstimatorHistory,
    cache: &'c mut PolicySequenceCache,
) -> Result<&'c Policy> {
    if stage == 0 {
        return Err(Error::InvalidParameter {
            name: "stage",
            reason: "stages are numbered from 1".into(),
        });
    }
    let seq = sequence_mut(cache, context, history)?;
    extend_to(inputs, context, stage, history, seq)?;
    Ok(&seq.policies[stage - 1])
}

/// The combined bonus `b^stage_context` that the backup at `stage` uses.
///
/// Needs `π¹ … π^{stage−1}` (replayed on demand) and history entry `stage`.
/// Must not be called for a stage below the cached prefix length.
pub fn stage_bonus(
    inputs: &ReplayInputs<'_>,
    context: usize,
    stage: usize,
    history: &EstimatorHistory,
    cache: &mut PolicySequenceCache,
) -> Result<Vec<f64>> {
    if stage == 0 || history.len() < stage {
        return Err(Error::HistoryTooShort {
            stage,
            needed: stage,
            available: history.len(),
        });
    }
    let seq = sequence_mut(cache, context, history)?;
    if let Some(record) = seq.stages.get(stage - 1) {
        return Ok(record.bonus.clone());
    }
    extend_to(inputs, context, stage, history, seq)?;
    let (_, dyn_index) = history.entry(stage);
    bonus_table(inputs, seq, context, stage, dyn_index)
}
