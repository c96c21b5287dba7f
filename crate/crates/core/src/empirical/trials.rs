//! Trial data in the estimate / communicate / re-estimate paradigm.
//!
//! CSV schema, one row per subject per question per trial:
//! `experiment_id,trial_id,condition,question_id,subject_id,truth,estimate_pre,estimate_post`.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::bias_transform;
use crate::error::{Error, Result};
use crate::stats;

pub const COLUMNS: [&str; 8] = [
    "experiment_id",
    "trial_id",
    "condition",
    "question_id",
    "subject_id",
    "truth",
    "estimate_pre",
    "estimate_post",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Decentralized,
    Centralized,
    Discussion,
    Control,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Decentralized,
        Condition::Centralized,
        Condition::Discussion,
        Condition::Control,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Decentralized => "decentralized",
            Condition::Centralized => "centralized",
            Condition::Discussion => "discussion",
            Condition::Control => "control",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "decentralized" | "decentralised" => Ok(Condition::Decentralized),
            "centralized" | "centralised" => Ok(Condition::Centralized),
            "discussion" => Ok(Condition::Discussion),
            "control" => Ok(Condition::Control),
            other => Err(Error::Malformed(format!("unknown condition {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEstimate {
    pub subject_id: String,
    pub estimate_pre: f64,
    pub estimate_post: f64,
}

impl SubjectEstimate {
    pub fn revised(&self) -> bool {
        self.estimate_post != self.estimate_pre
    }
}

/// One group answering one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment_id: String,
    pub trial_id: String,
    pub condition: Condition,
    pub question_id: String,
    pub truth: f64,
    pub subjects: Vec<SubjectEstimate>,
}

impl TrialRecord {
    pub fn key(&self) -> TrialKey {
        TrialKey {
            experiment_id: self.experiment_id.clone(),
            trial_id: self.trial_id.clone(),
            question_id: self.question_id.clone(),
        }
    }

    pub fn pre(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.estimate_pre).collect()
    }

    pub fn post(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.estimate_post).collect()
    }

    pub fn pre_biases(&self) -> Vec<f64> {
        bias_transform(&self.pre(), self.truth)
    }

    pub fn post_biases(&self) -> Vec<f64> {
        bias_transform(&self.post(), self.truth)
    }

    /// Population standard deviation of the pre-communication biases.
    pub fn s_e(&self) -> f64 {
        stats::std_dev(&self.pre_biases())
    }

    /// Trials with zero initial diversity cannot be standardized.
    pub fn is_standardizable(&self) -> bool {
        self.s_e() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialKey {
    pub experiment_id: String,
    pub trial_id: String,
    pub question_id: String,
}

impl std::fmt::Display for TrialKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.experiment_id, self.trial_id, self.question_id
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the source file (the header is line 1), when the
    /// rejection concerns a single row.
    pub line: Option<u64>,
    pub trial: Option<TrialKey>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadedTrials {
    pub trials: Vec<TrialRecord>,
    pub rejections: Vec<Rejection>,
    /// Loaded trials with `s_e = 0`, kept out of standardized analyses.
    pub excluded_from_standardized: Vec<TrialKey>,
}

pub fn load_trials(path: impl AsRef<Path>) -> Result<LoadedTrials> {
    let file = std::fs::File::open(path)?;
    read_trials(file)
}

/// Parses and validates trial rows. Bad rows and trials are collected as
/// rejections; only an unreadable source or a malformed header is fatal.
pub fn read_trials<R: std::io::Read>(reader: R) -> Result<LoadedTrials> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut idx = [0usize; 8];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("header is missing column {name:?}")))?;
    }

    let mut order: Vec<TrialKey> = Vec::new();
    let mut building: HashMap<TrialKey, TrialRecord> = HashMap::new();
    let mut rejections = Vec::new();

    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line());
        let reject = |reason: String, trial: Option<TrialKey>| Rejection {
            line,
            trial,
            reason,
        };
        let field = |k: usize| rec.get(idx[k]).unwrap_or("");
        let missing = (0..8).find(|&k| rec.get(idx[k]).is_none_or(|f| f.is_empty()));
        if let Some(k) = missing {
            rejections.push(reject(format!("{}: missing value", COLUMNS[k]), None));
            continue;
        }
        let key = TrialKey {
            experiment_id: field(0).to_string(),
            trial_id: field(1).to_string(),
            question_id: field(3).to_string(),
        };
        let condition = match field(2).parse::<Condition>() {
            Ok(c) => c,
            Err(e) => {
                rejections.push(reject(format!("condition: {e}"), Some(key)));
                continue;
            }
        };
        let mut nums = [0.0f64; 3];
        let mut bad = None;
        for (slot, k) in nums.iter_mut().zip([5usize, 6, 7]) {
            match field(k).parse::<f64>() {
                Ok(v) if v.is_finite() => *slot = v,
                Ok(_) => bad = Some(format!("{}: non-finite value {:?}", COLUMNS[k], field(k))),
                Err(_) => {
                    bad = Some(format!(
                        "{}: cannot parse {:?} as a number",
                        COLUMNS[k],
                        field(k)
                    ))
                }
            }
            if bad.is_some() {
                break;
            }
        }
        if let Some(reason) = bad {
            rejections.push(reject(reason, Some(key)));
            continue;
        }
        let [truth, pre, post] = nums;
        let subject = SubjectEstimate {
            subject_id: field(4).to_string(),
            estimate_pre: pre,
            estimate_post: post,
        };

        match building.get_mut(&key) {
            None => {
                order.push(key.clone());
                building.insert(
                    key.clone(),
                    TrialRecord {
                        experiment_id: key.experiment_id.clone(),
                        trial_id: key.trial_id.clone(),
                        condition,
                        question_id: key.question_id.clone(),
                        truth,
                        subjects: vec![subject],
                    },
                );
            }
            Some(trial) => {
                if trial.truth != truth {
                    rejections.push(reject(
                        format!(
                            "truth {truth} disagrees with {} earlier in the trial",
                            trial.truth
                        ),
                        Some(key),
                    ));
                } else if trial.condition != condition {
                    rejections.push(reject(
                        format!(
                            "condition {condition} disagrees with {} earlier in the trial",
                            trial.condition
                        ),
                        Some(key),
                    ));
                } else if trial
                    .subjects
                    .iter()
                    .any(|s| s.subject_id == subject.subject_id)
                {
                    rejections.push(reject(
                        format!("duplicate subject {:?}", subject.subject_id),
                        Some(key),
                    ));
                } else {
                    trial.subjects.push(subject);
                }
            }
        }
    }

    let mut trials = Vec::with_capacity(order.len());
    let mut excluded = Vec::new();
    for key in order {
        let trial = building
            .remove(&key)
            .expect("every ordered key was inserted");
        if trial.subjects.len() < 2 {
            rejections.push(Rejection {
                line: None,
                trial: Some(key),
                reason: format!(
                    "trial has {} subject(s), need at least 2",
                    trial.subjects.len()
                ),
            });
            continue;
        }
        if !trial.is_standardizable() {
            excluded.push(key);
        }
        trials.push(trial);
    }
    Ok(LoadedTrials {
        trials,
        rejections,
        excluded_from_standardized: excluded,
    })
}

pub fn write_trials<W: std::io::Write>(trials: &[TrialRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS)?;
    for t in trials {
        for s in &t.subjects {
            wtr.write_record([
                t.experiment_id.as_str(),
                t.trial_id.as_str(),
                t.condition.as_str(),
                t.question_id.as_str(),
                s.subject_id.as_str(),
                &format!("{:?}", t.truth),
                &format!("{:?}", s.estimate_pre),
                &format!("{:?}", s.estimate_post),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "experiment_id,trial_id,condition,question_id,subject_id,truth,estimate_pre,estimate_post\n";

    #[test]
    fn two_trials_load_cleanly() {
        let data = format!(
            "{HEADER}e1,t1,decentralized,q1,a,3,0,4\ne1,t1,decentralized,q1,b,3,4,4\n\
             e1,t1,decentralized,q1,c,3,8,4\ne1,t2,centralized,q1,a,10,9,10\ne1,t2,centralized,q1,b,10,12,11\n"
        );
        let loaded = read_trials(data.as_bytes()).unwrap();
        assert_eq!(loaded.trials.len(), 2);
        assert!(loaded.rejections.is_empty());
        assert_eq!(loaded.trials[0].subjects.len(), 3);
        assert_eq!(loaded.trials[1].condition, Condition::Centralized);
    }

    #[test]
    fn non_numeric_estimate_is_rejected() {
        let data = format!(
            "{HEADER}e1,t1,discussion,q1,a,3,0,4\ne1,t1,discussion,q1,b,3,abc,4\ne1,t1,discussion,q1,c,3,8,4\n"
        );
        let loaded = read_trials(data.as_bytes()).unwrap();
        assert_eq!(loaded.trials.len(), 1);
        assert_eq!(loaded.trials[0].subjects.len(), 2);
        assert_eq!(loaded.rejections.len(), 1);
        let r = &loaded.rejections[0];
        assert_eq!(r.line, Some(3));
        assert!(r.reason.contains("estimate_pre"), "{}", r.reason);
    }

    #[test]
    fn zero_diversity_is_flagged_not_dropped() {
        let data = format!("{HEADER}e1,t1,control,q1,a,3,5,4\ne1,t1,control,q1,b,3,5,6\n");
        let loaded = read_trials(data.as_bytes()).unwrap();
        assert_eq!(loaded.trials.len(), 1);
        assert_eq!(loaded.excluded_from_standardized.len(), 1);
        assert!(!loaded.trials[0].is_standardizable());
    }

    #[test]
    fn missing_column_is_fatal() {
        let data = "experiment_id,trial_id,condition,question_id,subject_id,truth,estimate_pre\n";
        assert!(matches!(
            read_trials(data.as_bytes()),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn singleton_and_inconsistent_rows() {
        let data = format!(
            "{HEADER}e1,t1,control,q1,a,3,5,4\ne1,t2,control,q1,a,3,1,2\ne1,t2,control,q1,b,4,1,2\n\
             e1,t2,control,q1,a,3,2,2\ne1,t2,bogus,q1,c,3,2,2\n"
        );
        let loaded = read_trials(data.as_bytes()).unwrap();
        assert!(loaded.trials.is_empty());
        // truth mismatch, duplicate subject, unknown condition, two singleton trials
        assert_eq!(loaded.rejections.len(), 5, "{:?}", loaded.rejections);
    }

    #[test]
    fn write_then_read() {
        let data =
            format!("{HEADER}e1,t1,decentralized,q1,a,3,0,4\ne1,t1,decentralized,q1,b,3,4.5,4\n");
        let loaded = read_trials(data.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_trials(&loaded.trials, &mut buf).unwrap();
        assert_eq!(read_trials(buf.as_slice()).unwrap().trials, loaded.trials);
    }
}
