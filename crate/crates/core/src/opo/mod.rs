//! The optimistic policy optimization learner.
//!
//! For a context `c` the learner maintains the policy sequence `π¹_c, π²_c, …`
//! where `π¹_c` is uniform and stage `k` produces `π^{k+1}_c` from `π^k_c`:
//!
//! 1. counterfactual occupancy `n(s,a) = Σ_{i<k} q(s,a | π^i_c, P̂^k_c)`, with
//!    every past policy evaluated under the stage-`k` dynamics estimate;
//! 2. bonus `b = b_{β_ℓ}(n) + 2H·b_{β_P}(n)` with `b_β(n) = min{1, (β/2)/(1+n)}`;
//! 3. clipped optimistic backup of the loss `f̂^k_c − b` under `P̂^k_c`;
//! 4. exponential-weights step `π^{k+1} ∝ π^k·exp(−η Q̂^k)`.
//!
//! Stage `k` only depends on the estimator pair fitted before episode `k`, so
//! a context's sequence is computed lazily and cached; see
//! [`replay_policy_sequence`].

mod agent;
mod backup;
mod bonus;
mod params;
mod replay;

pub use agent::OpoCmdp;
pub use backup::{optimistic_backup, policy_improve, OptimisticValues};
pub use bonus::{combined_bonus, exploration_bonus};
pub use params::{default_parameters, AlgoParams};
pub use replay::{
    replay_policy_sequence, stage_bonus, EstimatorHistory, PolicySequenceCache, ReplayInputs, StageRecord,
};
