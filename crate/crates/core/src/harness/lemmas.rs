use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::Run;
use crate::cmdp::{value_change_of_measure_check, InequalityCheck, Policy};
use crate::error::{Error, Result};
use crate::opo::StageRecord;

/// `Σ_t x_t / S_t ≤ 2 log(T+1)` with `S_t = λ + Σ_{k<t} x_k`.
///
/// Every `x_t` must lie in `[0, λ]`.
pub fn log_sum_check(xs: &[f64], lambda: f64) -> Result<InequalityCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be finite and positive, got {lambda}"),
        });
    }
    if let Some(&bad) = xs.iter().find(|&&x| !(0.0..=lambda).contains(&x)) {
        return Err(Error::InvalidParameter {
            name: "xs",
            reason: format!("value {bad} outside [0, {lambda}]"),
        });
    }
    let mut running = lambda;
    let mut lhs = 0.0;
    for &x in xs {
        lhs += x / running;
        running += x;
    }
    Ok(InequalityCheck {
        lhs,
        rhs: 2.0 * ((xs.len() + 1) as f64).ln(),
    })
}

/// Exponential-weights regret at `state` against the pure strategy
/// `comparator`:
///
/// ```text
/// Σ_k ⟨Q̂^k(s,·), π^k(·|s) − e_a⟩ ≤ log|A| / η + (η/2) Σ_k Σ_a π^k(a|s) Q̂^k(s,a)²
/// ```
///
/// `policies[k]` must be the policy that `stages[k]` evaluated.
pub fn omd_check(stages: &[StageRecord], policies: &[Policy], state: usize, comparator: usize, eta: f64) -> InequalityCheck {
    let num_actions = policies[0].num_actions();
    let mut lhs = 0.0;
    let mut second_moment = 0.0;
    for (stage, policy) in stages.iter().zip(policies) {
        let q = stage.values.q_row(state);
        let pi = policy.row(state);
        let played: f64 = pi.iter().zip(q).map(|(p, x)| p * x).sum();
        lhs += played - q[comparator];
        second_moment += pi.iter().zip(q).map(|(p, x)| p * x * x).sum::<f64>();
    }
    InequalityCheck {
        lhs,
        rhs: (num_actions as f64).ln() / eta + 0.5 * eta * second_moment,
    }
}

/// Outcome of one family of checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    /// Smallest `rhs − lhs` seen; `+∞` when nothing was checked.
    pub worst_slack: f64,
}

impl LemmaReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checks: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
        }
    }

    fn record(&mut self, check: &InequalityCheck) {
        self.checks += 1;
        if !check.holds() {
            self.violations += 1;
        }
        self.worst_slack = self.worst_slack.min(check.slack());
    }

    fn merge(mut self, other: LemmaReport) -> Self {
        self.checks += other.checks;
        self.violations += other.violations;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub log_sums: LemmaReport,
    pub omd: LemmaReport,
    pub change_of_measure: LemmaReport,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.reports().iter().all(|r| r.passed())
    }

    pub fn reports(&self) -> [&LemmaReport; 3] {
        [&self.log_sums, &self.omd, &self.change_of_measure]
    }
}

/// Runs every post-hoc inequality over a completed run:
///
/// * log sums on each `(c, s, a)` sequence of true occupancies, `λ = 1`;
/// * the OMD inequality for each context, decision state and pure comparator
///   over all recorded stages;
/// * both change-of-measure inequalities between `P̂^t_c` and `P*_c` under
///   `π^t_c` and `f*_c`, for every context and episode.
pub fn lemma_suite(run: &Run) -> Result<SuiteResult> {
    let model = &run.env.model;
    let space = &model.space;
    let num_actions = model.num_actions;
    let history = run.agent.history();
    let cache = run.agent.cache();
    let eta = run.agent.params().eta;

    let per_context: Vec<Result<SuiteResult>> = (0..model.num_contexts())
        .into_par_iter()
        .map(|c| {
            let mut log_sums = LemmaReport::new("log-sums");
            let mut omd = LemmaReport::new("omd");
            let mut change = LemmaReport::new("change-of-measure");

            let occupancies = &run.true_occupancies[c];
            let mut xs = Vec::with_capacity(occupancies.len());
            for s in space.decision_states() {
                for a in 0..num_actions {
                    xs.clear();
                    xs.extend(occupancies.iter().map(|q| q.get(s, a).clamp(0.0, 1.0)));
                    log_sums.record(&log_sum_check(&xs, 1.0)?);
                }
            }

            let stages = cache.stages(c);
            let policies = cache.policies(c);
            for s in space.decision_states() {
                for a in 0..num_actions {
                    omd.record(&omd_check(stages, policies, s, a, eta));
                }
            }

            for t in 1..=run.records.len().min(policies.len()) {
                let (_, dyn_index) = history.entry(t);
                let check = value_change_of_measure_check(
                    space,
                    &policies[t - 1],
                    &model.dynamics[c],
                    &run.env.dyn_class.get(dyn_index)[c],
                    &model.losses[c],
                )?;
                change.record(&check.forward);
                change.record(&check.reverse);
            }
            Ok(SuiteResult {
                log_sums,
                omd,
                change_of_measure: change,
            })
        })
        .collect();

    let mut total = SuiteResult {
        log_sums: LemmaReport::new("log-sums"),
        omd: LemmaReport::new("omd"),
        change_of_measure: LemmaReport::new("change-of-measure"),
    };
    for part in per_context {
        let part = part?;
        total.log_sums = total.log_sums.merge(part.log_sums);
        total.omd = total.omd.merge(part.omd);
        total.change_of_measure = total.change_of_measure.merge(part.change_of_measure);
    }
    Ok(total)
}
