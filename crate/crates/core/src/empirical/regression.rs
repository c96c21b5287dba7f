//! Ordinary least squares of standardized crowd change on standardized
//! individual change, with outlier filtering.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::empirical::bootstrap::{bootstrap_ci, BootstrapConfig};
use crate::empirical::changes::TrialErrorChange;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub n: usize,
}

/// Least-squares line `y = intercept + slope x` with classical standard
/// errors.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let sigma2 = ssr / (nf - 2.0);
    Ok(OlsFit {
        slope,
        intercept,
        slope_se: (sigma2 / sxx).sqrt(),
        intercept_se: (sigma2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        n,
    })
}

impl OlsFit {
    /// Two-sided t critical value with `n - 2` degrees of freedom.
    fn t_critical(&self, level: f64) -> f64 {
        let t = StudentsT::new(0.0, 1.0, (self.n - 2) as f64).expect("n >= 3 gives positive dof");
        t.inverse_cdf(1.0 - (1.0 - level) / 2.0)
    }

    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let h = self.t_critical(level) * self.slope_se;
        (self.slope - h, self.slope + h)
    }

    pub fn intercept_ci(&self, level: f64) -> (f64, f64) {
        let h = self.t_critical(level) * self.intercept_se;
        (self.intercept - h, self.intercept + h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialFilter {
    /// Keep trials whose standardized changes are at most the threshold.
    Threshold,
    /// Additionally require a strictly positive offset.
    PositiveOffset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
    pub intercept_ci: (f64, f64),
    pub slope_ci_bootstrap: (f64, f64),
    pub intercept_ci_bootstrap: (f64, f64),
    pub n_included: usize,
    pub n_excluded: usize,
    pub threshold_used: f64,
    pub filter: TrialFilter,
}

pub fn passes_filter(p: &TrialErrorChange, threshold: f64, filter: TrialFilter) -> bool {
    p.magnitude() <= threshold && (filter == TrialFilter::Threshold || p.offset > 0.0)
}

/// Fits `y_crowd = B0 + B1 x_individual` over the trials that survive the
/// filter. Intervals are classical t intervals plus a percentile bootstrap
/// over trials.
pub fn fit_group_individual_regression(
    points: &[TrialErrorChange],
    threshold: f64,
    filter: TrialFilter,
    boot: &BootstrapConfig,
) -> Result<RegressionResult> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| passes_filter(p, threshold, filter))
        .map(|p| (p.x_individual, p.y_crowd))
        .collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} trial(s) left after filtering, need at least 3",
            kept.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.iter().copied().unzip();
    let fit = ols(&xs, &ys)?;

    let refit = |sample: &[(f64, f64)]| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = sample.iter().copied().unzip();
        ols(&xs, &ys).ok()
    };
    let slope_ci_bootstrap = bootstrap_ci(|s| refit(s).map(|f| f.slope), &kept, boot)?;
    let intercept_ci_bootstrap = bootstrap_ci(|s| refit(s).map(|f| f.intercept), &kept, boot)?;

    Ok(RegressionResult {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_ci: fit.slope_ci(boot.level),
        intercept_ci: fit.intercept_ci(boot.level),
        slope_ci_bootstrap,
        intercept_ci_bootstrap,
        n_included: kept.len(),
        n_excluded: points.len() - kept.len(),
        threshold_used: threshold,
        filter,
    })
}
