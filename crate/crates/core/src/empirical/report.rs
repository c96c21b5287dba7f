//! End-to-end reanalysis: regression, unit-band fraction, improvement
//! tables and accuracy quartiles, packaged for JSON and CSV output.

use serde::{Deserialize, Serialize};

use crate::empirical::bootstrap::BootstrapConfig;
use crate::empirical::changes::{all_error_changes, fraction_in_unit_band, TrialErrorChange};
use crate::empirical::improvement::{
    improvement_probabilities, GroupOutcomeRule, ImprovementTable, Metric,
};
use crate::empirical::quartile::{accuracy_quartile_effect, QuartileReport};
use crate::empirical::regression::{
    fit_group_individual_regression, RegressionResult, TrialFilter,
};
use crate::empirical::trials::{LoadedTrials, Rejection, TrialKey};
use crate::error::Result;

/// A report section that either ran or was skipped with a reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section<T> {
    Ok(T),
    Skipped { reason: String },
}

impl<T> Section<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Section::Ok(v),
            Err(e) => Section::Skipped {
                reason: e.to_string(),
            },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(v) => Some(v),
            Section::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReanalysisConfig {
    pub threshold: f64,
    pub filter: TrialFilter,
    pub metrics: Vec<Metric>,
    pub group_rules: Vec<GroupOutcomeRule>,
    pub bootstrap: BootstrapConfig,
}

impl Default for ReanalysisConfig {
    fn default() -> Self {
        ReanalysisConfig {
            threshold: 10.0,
            filter: TrialFilter::Threshold,
            metrics: Metric::BOTH.to_vec(),
            group_rules: vec![GroupOutcomeRule::Strict, GroupOutcomeRule::NotWorse],
            bootstrap: BootstrapConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReanalysisReport {
    pub config: ReanalysisConfig,
    pub trials_loaded: usize,
    pub rejections: Vec<Rejection>,
    /// Loaded trials with zero initial diversity.
    pub excluded_from_standardized: Vec<TrialKey>,
    pub trials_standardized: usize,
    pub band_fraction: Section<f64>,
    pub regression: Section<RegressionResult>,
    pub improvement: Vec<Section<ImprovementTable>>,
    pub quartiles: Vec<Section<QuartileReport>>,
    /// Per-trial standardized changes, exported separately as CSV.
    #[serde(skip)]
    pub changes: Vec<TrialErrorChange>,
}

pub fn reanalyze(loaded: &LoadedTrials, config: &ReanalysisConfig) -> ReanalysisReport {
    let trials = &loaded.trials;
    let changes = all_error_changes(trials);
    let boot = config.bootstrap;

    let regression = Section::from_result(fit_group_individual_regression(
        &changes,
        config.threshold,
        config.filter,
        &boot.salted(1_000),
    ));
    let mut improvement = Vec::new();
    for (i, &rule) in config.group_rules.iter().enumerate() {
        for (j, &metric) in config.metrics.iter().enumerate() {
            let salt = 2_000 + (i * 16 + j) as u64;
            improvement.push(Section::from_result(improvement_probabilities(
                trials,
                metric,
                rule,
                &boot.salted(salt),
            )));
        }
    }
    let quartiles = config
        .metrics
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            Section::from_result(accuracy_quartile_effect(
                trials,
                m,
                &boot.salted(3_000 + j as u64),
            ))
        })
        .collect();

    ReanalysisReport {
        config: config.clone(),
        trials_loaded: trials.len(),
        rejections: loaded.rejections.clone(),
        excluded_from_standardized: loaded.excluded_from_standardized.clone(),
        trials_standardized: changes.len(),
        band_fraction: Section::from_result(fraction_in_unit_band(&changes)),
        regression,
        improvement,
        quartiles,
        changes,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl ReanalysisReport {
    pub fn write_changes_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "experiment_id",
            "trial_id",
            "question_id",
            "condition",
            "x_individual",
            "y_crowd",
            "offset",
            "in_unit_band",
        ])?;
        for c in &self.changes {
            wtr.write_record([
                c.key.experiment_id.clone(),
                c.key.trial_id.clone(),
                c.key.question_id.clone(),
                c.condition.to_string(),
                format!("{:?}", c.x_individual),
                format!("{:?}", c.y_crowd),
                format!("{:?}", c.offset),
                c.in_unit_band.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_improvement_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "metric",
            "group_rule",
            "condition",
            "group_improved",
            "probability",
            "ci_lo",
            "ci_hi",
            "trials",
            "eligible",
            "successes",
        ])?;
        for table in self.improvement.iter().filter_map(Section::ok) {
            let rule = match table.group_rule {
                GroupOutcomeRule::Strict => "strict",
                GroupOutcomeRule::NotWorse => "not_worse",
            };
            for c in &table.cells {
                let e = &c.estimate;
                wtr.write_record([
                    table.metric.as_str().to_string(),
                    rule.to_string(),
                    c.condition.to_string(),
                    c.group_improved.to_string(),
                    opt(e.probability),
                    opt(e.ci.map(|ci| ci.0)),
                    opt(e.ci.map(|ci| ci.1)),
                    e.trials.to_string(),
                    e.eligible.to_string(),
                    e.successes.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_quartiles_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "metric",
            "quartile",
            "probability",
            "ci_lo",
            "ci_hi",
            "trials",
            "eligible",
            "successes",
        ])?;
        for report in self.quartiles.iter().filter_map(Section::ok) {
            for q in &report.effects {
                let e = &q.estimate;
                wtr.write_record([
                    q.metric.as_str().to_string(),
                    format!("Q{}", q.quartile),
                    opt(e.probability),
                    opt(e.ci.map(|ci| ci.0)),
                    opt(e.ci.map(|ci| ci.1)),
                    e.trials.to_string(),
                    e.eligible.to_string(),
                    e.successes.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::synthetic::{synthetic_trials, SyntheticConfig};

    #[test]
    fn synthetic_end_to_end() {
        let trials = synthetic_trials(&SyntheticConfig::default()).unwrap();
        let loaded = LoadedTrials {
            trials,
            rejections: vec![],
            excluded_from_standardized: vec![],
        };
        let cfg = ReanalysisConfig {
            bootstrap: BootstrapConfig {
                resamples: 200,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = reanalyze(&loaded, &cfg);
        assert_eq!(r.band_fraction.ok(), Some(&1.0));
        let reg = r.regression.ok().unwrap();
        assert!((reg.slope - 1.0).abs() < 1e-6 && (reg.intercept - 1.0).abs() < 1e-6);
        assert_eq!(r.improvement.len(), 4);
        assert!(r.quartiles.iter().all(|q| q.ok().is_some()));
        let mut buf = Vec::new();
        r.write_improvement_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().count() > 1);
    }
}
