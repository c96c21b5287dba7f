use serde::{Deserialize, Serialize};

use crate::empirical::trials::{Condition, TrialKey, TrialRecord};
use crate::error::{Error, Result};
use crate::metrics::ObservedChange;

/// Rounding allowance on the `[0, 1]` offset band; a fully converged trial
/// lands on 1 only up to floating-point error.
pub const UNIT_BAND_TOL: f64 = 1e-9;

/// Standardized error changes of one trial. Both changes are divided by the
/// pre-communication `s_e^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialErrorChange {
    pub key: TrialKey,
    pub condition: Condition,
    /// `Delta E(e^2) / s_e^2`
    pub x_individual: f64,
    /// `Delta E(e)^2 / s_e^2`
    pub y_crowd: f64,
    /// `y_crowd - x_individual`; 1 at full consensus.
    pub offset: f64,
    pub in_unit_band: bool,
}

impl TrialErrorChange {
    /// Largest absolute standardized change, used by outlier thresholds.
    pub fn magnitude(&self) -> f64 {
        self.x_individual.abs().max(self.y_crowd.abs())
    }
}

pub fn trial_error_changes(trial: &TrialRecord) -> Result<TrialErrorChange> {
    let c = ObservedChange::between(&trial.pre_biases(), &trial.post_biases()).map_err(|_| {
        Error::Degenerate(format!(
            "trial {} has zero pre-estimate spread",
            trial.key()
        ))
    })?;
    let offset = c.crowd - c.individual;
    Ok(TrialErrorChange {
        key: trial.key(),
        condition: trial.condition,
        x_individual: c.individual,
        y_crowd: c.crowd,
        offset,
        in_unit_band: (-UNIT_BAND_TOL..=1.0 + UNIT_BAND_TOL).contains(&offset),
    })
}

/// Changes for every standardizable trial, in input order.
pub fn all_error_changes(trials: &[TrialRecord]) -> Vec<TrialErrorChange> {
    trials
        .iter()
        .filter(|t| t.is_standardizable())
        .filter_map(|t| trial_error_changes(t).ok())
        .collect()
}

/// Share of trials whose offset lies in `[0, 1]`.
pub fn fraction_in_unit_band(points: &[TrialErrorChange]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no trials to summarize".into()));
    }
    Ok(points.iter().filter(|p| p.in_unit_band).count() as f64 / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::testutil::trial;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_convergence_fixture() {
        let c = trial_error_changes(&trial(&[0.0, 4.0, 8.0], &[4.0; 3], 3.0)).unwrap();
        assert_abs_diff_eq!(c.y_crowd, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.x_individual, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.offset, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn no_revision_gives_zero() {
        let c = trial_error_changes(&trial(&[0.0, 4.0, 8.0], &[0.0, 4.0, 8.0], 3.0)).unwrap();
        assert_eq!((c.x_individual, c.y_crowd, c.offset), (0.0, 0.0, 0.0));
        assert!(c.in_unit_band);
    }

    #[test]
    fn half_way_to_mean() {
        // post = pre + 0.5 (mean - pre) shrinks s_e by half: offset = 1 - 0.25
        let pre = [0.0, 4.0, 8.0];
        let post: Vec<f64> = pre.iter().map(|p| p + 0.5 * (4.0 - p)).collect();
        let c = trial_error_changes(&trial(&pre, &post, 3.0)).unwrap();
        assert_abs_diff_eq!(c.offset, 0.75, epsilon = 1e-14);
        assert!(c.offset > 0.0 && c.offset < 1.0);
    }

    #[test]
    fn degenerate_trial_errors() {
        assert!(trial_error_changes(&trial(&[2.0, 2.0], &[1.0, 3.0], 0.0)).is_err());
    }

    #[test]
    fn band_fraction_with_one_divergent_trial() {
        let mut points: Vec<_> = (0..9)
            .map(|_| trial_error_changes(&trial(&[0.0, 4.0, 8.0], &[4.0; 3], 3.0)).unwrap())
            .collect();
        // spreading out moves opinions apart: offset < 0
        points
            .push(trial_error_changes(&trial(&[0.0, 4.0, 8.0], &[-4.0, 4.0, 12.0], 3.0)).unwrap());
        assert!(points[9].offset < 0.0 && !points[9].in_unit_band);
        assert_abs_diff_eq!(
            fraction_in_unit_band(&points).unwrap(),
            0.9,
            epsilon = 1e-15
        );
        assert!(fraction_in_unit_band(&[]).is_err());
    }
}
