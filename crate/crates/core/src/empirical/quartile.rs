//! Improvement as a function of a subject's accuracy on their *other*
//! questions, which avoids regression-to-the-mean artefacts of ranking by
//! the focal estimate itself.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::empirical::bootstrap::BootstrapConfig;
use crate::empirical::improvement::{estimate, tally, Estimate, Metric};
use crate::empirical::trials::{TrialKey, TrialRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileAssignment {
    pub trial: TrialKey,
    pub subject_id: String,
    /// Mean standardized pre-estimate error `|e| / s_e` over the subject's
    /// other questions.
    pub loo_error: f64,
    /// 1 = most accurate quarter.
    pub quartile: u8,
}

/// Assigns quartiles within each trial.
///
/// Subjects are identified by `(experiment_id, subject_id)`. Ranking is by
/// leave-one-question-out error, ties broken by subject id; quartile is
/// `floor(4 rank / m) + 1` for the `m` rankable subjects in the trial, so
/// bins need not be equal. Trials with `s_e = 0` neither contribute errors
/// nor receive assignments.
pub fn assign_quartiles(trials: &[TrialRecord]) -> Vec<QuartileAssignment> {
    // (experiment, subject) -> [(question, standardized error)]
    let mut errors: HashMap<(&str, &str), Vec<(&str, f64)>> = HashMap::new();
    for t in trials.iter().filter(|t| t.is_standardizable()) {
        let s_e = t.s_e();
        for s in &t.subjects {
            errors
                .entry((&t.experiment_id, &s.subject_id))
                .or_default()
                .push((&t.question_id, (s.estimate_pre - t.truth).abs() / s_e));
        }
    }

    let mut out = Vec::new();
    for t in trials.iter().filter(|t| t.is_standardizable()) {
        let mut ranked: Vec<(&str, f64)> = t
            .subjects
            .iter()
            .filter_map(|s| {
                let others: Vec<f64> = errors[&(t.experiment_id.as_str(), s.subject_id.as_str())]
                    .iter()
                    .filter(|(q, _)| *q != t.question_id)
                    .map(|(_, e)| *e)
                    .collect();
                (!others.is_empty()).then(|| {
                    (
                        s.subject_id.as_str(),
                        others.iter().sum::<f64>() / others.len() as f64,
                    )
                })
            })
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        let m = ranked.len();
        for (rank, (subject, loo)) in ranked.into_iter().enumerate() {
            out.push(QuartileAssignment {
                trial: t.key(),
                subject_id: subject.to_string(),
                loo_error: loo,
                quartile: (4 * rank / m) as u8 + 1,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileEffect {
    pub quartile: u8,
    pub metric: Metric,
    #[serde(flatten)]
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileReport {
    pub assignments: Vec<QuartileAssignment>,
    pub effects: Vec<QuartileEffect>,
}

/// Improvement probability per accuracy quartile, experiment-balanced, with
/// bootstrap intervals over trials.
pub fn accuracy_quartile_effect(
    trials: &[TrialRecord],
    metric: Metric,
    boot: &BootstrapConfig,
) -> Result<QuartileReport> {
    let assignments = assign_quartiles(trials);
    if assignments.is_empty() {
        return Err(Error::InsufficientData(
            "no subject answered at least two questions with nonzero initial diversity; \
             accuracy quartile analysis skipped"
                .into(),
        ));
    }
    let mut lookup: HashMap<(TrialKey, &str), u8> = HashMap::new();
    for a in &assignments {
        lookup.insert((a.trial.clone(), a.subject_id.as_str()), a.quartile);
    }

    let mut effects = Vec::new();
    for q in 1..=4u8 {
        let tallies: Vec<_> = trials
            .iter()
            .filter(|t| t.is_standardizable())
            .map(|t| {
                let key = t.key();
                tally(t, metric, |i| {
                    lookup.get(&(key.clone(), t.subjects[i].subject_id.as_str())) == Some(&q)
                })
            })
            .collect();
        effects.push(QuartileEffect {
            quartile: q,
            metric,
            estimate: estimate(&tallies, &boot.salted(100 + q as u64))?,
        });
    }
    Ok(QuartileReport {
        assignments,
        effects,
    })
}
