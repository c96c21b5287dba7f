//! Reanalysis of pre/post estimation experiments.

pub mod bootstrap;
pub mod changes;
pub mod improvement;
pub mod quartile;
pub mod regression;
pub mod report;
pub mod synthetic;
pub mod trials;

pub use bootstrap::{bootstrap_ci, BootstrapConfig};
pub use changes::{
    all_error_changes, fraction_in_unit_band, trial_error_changes, TrialErrorChange,
};
pub use improvement::{improvement_probabilities, GroupOutcomeRule, ImprovementTable, Metric};
pub use quartile::{accuracy_quartile_effect, assign_quartiles, QuartileReport};
pub use regression::{fit_group_individual_regression, RegressionResult, TrialFilter};
pub use report::{reanalyze, ReanalysisConfig, ReanalysisReport};
pub use trials::{load_trials, read_trials, Condition, LoadedTrials, TrialRecord};

#[cfg(test)]
pub(crate) mod testutil {
    use super::trials::{Condition, SubjectEstimate, TrialRecord};

    pub fn trial(pre: &[f64], post: &[f64], truth: f64) -> TrialRecord {
        TrialRecord {
            experiment_id: "e".into(),
            trial_id: "t".into(),
            condition: Condition::Decentralized,
            question_id: "q".into(),
            truth,
            subjects: pre
                .iter()
                .zip(post)
                .enumerate()
                .map(|(i, (&a, &b))| SubjectEstimate {
                    subject_id: format!("s{i}"),
                    estimate_pre: a,
                    estimate_post: b,
                })
                .collect(),
        }
    }
}
