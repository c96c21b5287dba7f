//! Probability that an individual becomes more accurate, split by condition
//! and by whether the group as a whole improved.
//!
//! Every trial contributes its own proportion; trials are averaged with
//! weight `1 / (trials of that experiment in the cell)` so each experiment
//! carries equal total weight.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::empirical::bootstrap::{bootstrap_ci, BootstrapConfig};
use crate::empirical::trials::{Condition, TrialRecord};
use crate::error::{Error, Result};
use crate::metrics::crowd_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// P(improve | revised); subjects who did not revise are left out.
    ConditionalOnRevision,
    /// P(improve or not get worse), over all subjects.
    ImproveOrStay,
}

impl Metric {
    pub const BOTH: [Metric; 2] = [Metric::ConditionalOnRevision, Metric::ImproveOrStay];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::ConditionalOnRevision => "conditional_on_revision",
            Metric::ImproveOrStay => "improve_or_stay",
        }
    }
}

/// When a group counts as having improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupOutcomeRule {
    /// Crowd error strictly decreased.
    Strict,
    /// Crowd error did not increase.
    NotWorse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectOutcome {
    Improved,
    Worsened,
    Same,
}

pub fn classify(e_pre: f64, e_post: f64) -> SubjectOutcome {
    let (a, b) = (e_pre.abs(), e_post.abs());
    if b < a {
        SubjectOutcome::Improved
    } else if b > a {
        SubjectOutcome::Worsened
    } else {
        SubjectOutcome::Same
    }
}

pub fn group_improved(trial: &TrialRecord, rule: GroupOutcomeRule) -> bool {
    let change = crowd_error(&trial.post_biases()) - crowd_error(&trial.pre_biases());
    match rule {
        GroupOutcomeRule::Strict => change < 0.0,
        GroupOutcomeRule::NotWorse => change <= 0.0,
    }
}

/// Successes over eligible subjects within one trial (or a subset of its
/// subjects).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub experiment_id: String,
    pub successes: usize,
    pub eligible: usize,
}

/// Tallies the metric over the subjects of `trial` selected by `include`.
pub fn tally<F: Fn(usize) -> bool>(trial: &TrialRecord, metric: Metric, include: F) -> Tally {
    let mut t = Tally {
        experiment_id: trial.experiment_id.clone(),
        successes: 0,
        eligible: 0,
    };
    for (i, s) in trial.subjects.iter().enumerate() {
        if !include(i) {
            continue;
        }
        let outcome = classify(s.estimate_pre - trial.truth, s.estimate_post - trial.truth);
        match metric {
            Metric::ConditionalOnRevision => {
                if s.revised() {
                    t.eligible += 1;
                    t.successes += (outcome == SubjectOutcome::Improved) as usize;
                }
            }
            Metric::ImproveOrStay => {
                t.eligible += 1;
                t.successes += (outcome != SubjectOutcome::Worsened) as usize;
            }
        }
    }
    t
}

/// Experiment-balanced mean of per-trial proportions; `None` when no trial
/// has an eligible subject.
pub fn weighted_probability(tallies: &[Tally]) -> Option<f64> {
    let mut per_exp: HashMap<&str, usize> = HashMap::new();
    for t in tallies.iter().filter(|t| t.eligible > 0) {
        *per_exp.entry(&t.experiment_id).or_default() += 1;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for t in tallies.iter().filter(|t| t.eligible > 0) {
        let w = 1.0 / per_exp[t.experiment_id.as_str()] as f64;
        num += w * t.successes as f64 / t.eligible as f64;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub probability: Option<f64>,
    /// Percentile bootstrap over trials, widened if needed so that it
    /// contains the point estimate.
    pub ci: Option<(f64, f64)>,
    pub trials: usize,
    pub eligible: usize,
    pub successes: usize,
}

/// Point estimate and bootstrap interval for one group of trial tallies.
pub fn estimate(tallies: &[Tally], boot: &BootstrapConfig) -> Result<Estimate> {
    let defined: Vec<Tally> = tallies.iter().filter(|t| t.eligible > 0).cloned().collect();
    let probability = weighted_probability(&defined);
    let ci = match probability {
        None => None,
        Some(p) => {
            let (lo, hi) = bootstrap_ci(weighted_probability, &defined, boot)?;
            Some((lo.min(p), hi.max(p)))
        }
    };
    Ok(Estimate {
        probability,
        ci,
        trials: defined.len(),
        eligible: defined.iter().map(|t| t.eligible).sum(),
        successes: defined.iter().map(|t| t.successes).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementCell {
    pub condition: Condition,
    pub group_improved: bool,
    #[serde(flatten)]
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementTable {
    pub metric: Metric,
    pub group_rule: GroupOutcomeRule,
    pub cells: Vec<ImprovementCell>,
}

/// Builds the condition x group-outcome table. Every condition present in
/// the data gets both group-outcome cells; cells without eligible subjects
/// have no probability.
pub fn improvement_probabilities(
    trials: &[TrialRecord],
    metric: Metric,
    rule: GroupOutcomeRule,
    boot: &BootstrapConfig,
) -> Result<ImprovementTable> {
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials".into()));
    }
    let mut cells = Vec::new();
    for (ci, condition) in Condition::ALL.into_iter().enumerate() {
        let in_condition: Vec<&TrialRecord> =
            trials.iter().filter(|t| t.condition == condition).collect();
        if in_condition.is_empty() {
            continue;
        }
        for group in [true, false] {
            let tallies: Vec<Tally> = in_condition
                .iter()
                .filter(|t| group_improved(t, rule) == group)
                .map(|t| tally(t, metric, |_| true))
                .collect();
            let salt = (ci as u64) * 2 + group as u64;
            cells.push(ImprovementCell {
                condition,
                group_improved: group,
                estimate: estimate(&tallies, &boot.salted(salt))?,
            });
        }
    }
    Ok(ImprovementTable {
        metric,
        group_rule: rule,
        cells,
    })
}

impl ImprovementTable {
    pub fn cell(&self, condition: Condition, group_improved: bool) -> Option<&ImprovementCell> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.group_improved == group_improved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::testutil::trial;

    fn boot() -> BootstrapConfig {
        BootstrapConfig {
            resamples: 200,
            ..Default::default()
        }
    }

    #[test]
    fn fixture_trial_all_revisers_improve() {
        let t = trial(&[0.0, 4.0, 8.0], &[4.0; 3], 3.0);
        let table = improvement_probabilities(
            &[t.clone()],
            Metric::ConditionalOnRevision,
            GroupOutcomeRule::NotWorse,
            &boot(),
        )
        .unwrap();
        let tally_ = tally(&t, Metric::ConditionalOnRevision, |_| true);
        assert_eq!((tally_.successes, tally_.eligible), (2, 2));
        // crowd error 1 -> 1: not worse, but not strictly better
        let cell = table.cell(Condition::Decentralized, true).unwrap();
        assert_eq!(cell.estimate.probability, Some(1.0));
        assert_eq!(cell.estimate.ci, Some((1.0, 1.0)));
        let strict = improvement_probabilities(
            &[t],
            Metric::ConditionalOnRevision,
            GroupOutcomeRule::Strict,
            &boot(),
        )
        .unwrap();
        assert_eq!(
            strict
                .cell(Condition::Decentralized, false)
                .unwrap()
                .estimate
                .probability,
            Some(1.0)
        );
        assert_eq!(
            strict
                .cell(Condition::Decentralized, true)
                .unwrap()
                .estimate
                .probability,
            None
        );
    }

    #[test]
    fn no_revision_trial() {
        let t = trial(&[0.0, 4.0, 8.0], &[0.0, 4.0, 8.0], 3.0);
        let m1 = tally(&t, Metric::ConditionalOnRevision, |_| true);
        assert_eq!(m1.eligible, 0);
        assert_eq!(weighted_probability(&[m1]), None);
        let m2 = tally(&t, Metric::ImproveOrStay, |_| true);
        assert_eq!(weighted_probability(&[m2]), Some(1.0));
    }

    #[test]
    fn experiments_weigh_equally() {
        let mut tallies: Vec<Tally> = (0..10)
            .map(|_| Tally {
                experiment_id: "big".into(),
                successes: 3,
                eligible: 3,
            })
            .collect();
        tallies.push(Tally {
            experiment_id: "small".into(),
            successes: 0,
            eligible: 4,
        });
        assert_eq!(weighted_probability(&tallies), Some(0.5));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(-3.0, 1.0), SubjectOutcome::Improved);
        assert_eq!(classify(1.0, -2.0), SubjectOutcome::Worsened);
        assert_eq!(classify(2.0, -2.0), SubjectOutcome::Same);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(improvement_probabilities(
            &[],
            Metric::ImproveOrStay,
            GroupOutcomeRule::Strict,
            &boot()
        )
        .is_err());
    }
}
