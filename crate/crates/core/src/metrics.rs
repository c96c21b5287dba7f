//! Crowd and individual error, truth alignment and its calibration/herding
//! decomposition, and the closed-form asymptotic error changes.
//!
//! All "change" quantities are standardized by the initial bias variance
//! `s_e^2` unless a name says `raw`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{influence_centralization, CentralityVector};
use crate::stats;

/// `|z|` at or below this is treated as zero crowd bias.
pub const Z_EPS: f64 = 1e-9;

/// Squared bias of the crowd mean, `E(e)^2`.
pub fn crowd_error(e: &[f64]) -> f64 {
    stats::mean(e).powi(2)
}

/// Mean squared bias, `E(e^2)`.
pub fn individual_error(e: &[f64]) -> f64 {
    e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64
}

/// Population variance of the biases, `s_e^2`.
pub fn diversity(e: &[f64]) -> f64 {
    stats::variance(e)
}

fn check_pair(v: &CentralityVector, e: &[f64]) -> Result<()> {
    if v.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            actual: e.len(),
        });
    }
    Ok(())
}

/// `c_v r(v, e)`: the asymptotic shift of the crowd bias in units of `s_e`.
///
/// Evaluated as `n cov(v, e) / s_e`, which is exact even when `v` is uniform.
pub fn standardized_change_in_bias(v: &CentralityVector, e: &[f64]) -> Result<f64> {
    check_pair(v, e)?;
    let s_e = stats::std_dev(e);
    if s_e == 0.0 {
        return Err(Error::Degenerate(
            "bias vector has zero spread (s_e = 0)".into(),
        ));
    }
    Ok(e.len() as f64 * stats::covariance(v.as_slice(), e) / s_e)
}

/// `alpha = -z c_v r(v, e)`.
pub fn truth_alignment(z: f64, c_v: f64, r_ve: f64) -> f64 {
    -z * c_v * r_ve
}

/// Truth alignment from calibration and herding:
/// `c_v / (2 s_e^2) * (s(d^2) r(v, d^2) - s(e^2) r(v, e^2))`.
///
/// A zero standard deviation zeroes its term regardless of the (undefined)
/// correlation passed alongside it.
pub fn alpha_from_decomposition(
    c_v: f64,
    s_e: f64,
    s_e2: f64,
    r_ve2: f64,
    s_d2: f64,
    r_vd2: f64,
) -> f64 {
    let term = |s: f64, r: f64| if s == 0.0 { 0.0 } else { s * r };
    c_v / (2.0 * s_e * s_e) * (term(s_d2, r_vd2) - term(s_e2, r_ve2))
}

/// Decomposed truth alignment computed straight from the vectors, in
/// covariance form: `n (cov(v, d^2) - cov(v, e^2)) / (2 s_e^2)`.
pub fn alpha_from_vectors(v: &CentralityVector, e: &[f64]) -> Result<f64> {
    check_pair(v, e)?;
    let s_e2 = diversity(e);
    if s_e2 == 0.0 {
        return Err(Error::Degenerate(
            "bias vector has zero spread (s_e = 0)".into(),
        ));
    }
    let m = stats::mean(e);
    let e_sq = stats::squares(e);
    let d_sq: Vec<f64> = e.iter().map(|x| (x - m) * (x - m)).collect();
    let vs = v.as_slice();
    let n = e.len() as f64;
    Ok(n * (stats::covariance(vs, &d_sq) - stats::covariance(vs, &e_sq)) / (2.0 * s_e2))
}

/// Standardized asymptotic change in crowd error,
/// `c_v^2 r^2 + 2 z c_v r`.
pub fn predicted_crowd_error_change(c_v: f64, r_ve: f64, z: f64) -> f64 {
    let shift = c_v * r_ve;
    shift * shift + 2.0 * z * shift
}

/// Standardized asymptotic change in mean individual error; always exactly
/// one below the crowd change.
pub fn predicted_individual_error_change(c_v: f64, r_ve: f64, z: f64) -> f64 {
    predicted_crowd_error_change(c_v, r_ve, z) - 1.0
}

fn require_nonzero_z(z: f64) -> Result<()> {
    if !(z.abs() > Z_EPS) {
        return Err(Error::Degenerate(format!(
            "alpha form needs nonzero crowd bias, got z = {z}"
        )));
    }
    Ok(())
}

/// Crowd change in terms of truth alignment, `alpha^2 / z^2 - 2 alpha`.
pub fn crowd_error_change_from_alpha(alpha: f64, z: f64) -> Result<f64> {
    require_nonzero_z(z)?;
    Ok(alpha * alpha / (z * z) - 2.0 * alpha)
}

pub fn individual_error_change_from_alpha(alpha: f64, z: f64) -> Result<f64> {
    Ok(crowd_error_change_from_alpha(alpha, z)? - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovementRegions {
    pub crowd_improves: bool,
    pub individual_improves: bool,
}

/// Open interval of `alpha` on which the crowd improves: `(0, 2 z^2)`.
pub fn crowd_improvement_interval(z: f64) -> (f64, f64) {
    (0.0, 2.0 * z * z)
}

/// Open interval of `alpha` on which mean individual error improves:
/// `z^2 (1 -+ sqrt(1 + 1/z^2))`.
pub fn individual_improvement_interval(z: f64) -> (f64, f64) {
    let z2 = z * z;
    // z^2 sqrt(1 + 1/z^2) = |z| sqrt(z^2 + 1), which avoids overflow of 1/z^2
    let root = z.abs() * (z2 + 1.0).sqrt();
    (z2 - root, z2 + root)
}

pub fn improvement_regions(alpha: f64, z: f64) -> Result<ImprovementRegions> {
    require_nonzero_z(z)?;
    let (c_lo, c_hi) = crowd_improvement_interval(z);
    let (i_lo, i_hi) = individual_improvement_interval(z);
    Ok(ImprovementRegions {
        crowd_improves: c_lo < alpha && alpha < c_hi,
        individual_improves: i_lo < alpha && alpha < i_hi,
    })
}

/// Scalar summary of a crowd's initial biases under an influence vector.
///
/// Correlations with a constant side are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrowdStats {
    pub n: usize,
    pub mean_bias: f64,
    pub z: f64,
    pub s_e: f64,
    pub c_v: f64,
    pub r_ve: f64,
    pub alpha: f64,
    pub calibration: f64,
    pub herding: f64,
    pub s_e2: f64,
    pub s_d2: f64,
}

impl CrowdStats {
    pub fn compute(v: &CentralityVector, e: &[f64]) -> Result<Self> {
        check_pair(v, e)?;
        let s_e = stats::std_dev(e);
        if s_e == 0.0 {
            return Err(Error::Degenerate(
                "bias vector has zero spread (s_e = 0)".into(),
            ));
        }
        let vs = v.as_slice();
        let mean_bias = stats::mean(e);
        let z = mean_bias / s_e;
        let c_v = influence_centralization(v);
        let e_sq = stats::squares(e);
        let d_sq: Vec<f64> = e.iter().map(|x| (x - mean_bias).powi(2)).collect();
        let r_ve = stats::correlation(vs, e).unwrap_or(0.0);
        Ok(CrowdStats {
            n: e.len(),
            mean_bias,
            z,
            s_e,
            c_v,
            r_ve,
            alpha: truth_alignment(z, c_v, r_ve),
            calibration: -stats::correlation(vs, &e_sq).unwrap_or(0.0),
            herding: -stats::correlation(vs, &d_sq).unwrap_or(0.0),
            s_e2: stats::std_dev(&e_sq),
            s_d2: stats::std_dev(&d_sq),
        })
    }

    /// `Delta z = c_v r(v, e)`.
    pub fn delta_z(&self) -> f64 {
        self.c_v * self.r_ve
    }

    pub fn alpha_decomposed(&self) -> f64 {
        alpha_from_decomposition(
            self.c_v,
            self.s_e,
            self.s_e2,
            -self.calibration,
            self.s_d2,
            -self.herding,
        )
    }

    pub fn crowd_change(&self) -> f64 {
        predicted_crowd_error_change(self.c_v, self.r_ve, self.z)
    }

    pub fn individual_change(&self) -> f64 {
        predicted_individual_error_change(self.c_v, self.r_ve, self.z)
    }
}

/// Closed-form outcome for one crowd, in standardized and raw units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub stats: CrowdStats,
    pub delta_z: f64,
    pub alpha: f64,
    pub alpha_decomposed: f64,
    pub crowd_change: f64,
    pub individual_change: f64,
    pub crowd_change_raw: f64,
    pub individual_change_raw: f64,
    /// `None` when the crowd is unbiased (`|z| <= Z_EPS`).
    pub regions: Option<ImprovementRegions>,
}

impl Prediction {
    pub fn from_biases(v: &CentralityVector, e: &[f64]) -> Result<Self> {
        let stats = CrowdStats::compute(v, e)?;
        let var = stats.s_e * stats.s_e;
        Ok(Prediction {
            delta_z: stats.delta_z(),
            alpha: stats.alpha,
            alpha_decomposed: stats.alpha_decomposed(),
            crowd_change: stats.crowd_change(),
            individual_change: stats.individual_change(),
            crowd_change_raw: stats.crowd_change() * var,
            individual_change_raw: stats.individual_change() * var,
            regions: improvement_regions(stats.alpha, stats.z).ok(),
            stats,
        })
    }
}

/// Observed change between two bias vectors, standardized by the variance
/// of the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedChange {
    pub crowd: f64,
    pub individual: f64,
    pub s_e2_before: f64,
}

impl ObservedChange {
    pub fn between(before: &[f64], after: &[f64]) -> Result<Self> {
        if before.len() != after.len() {
            return Err(Error::DimensionMismatch {
                expected: before.len(),
                actual: after.len(),
            });
        }
        let var = diversity(before);
        if var == 0.0 {
            return Err(Error::Degenerate(
                "initial biases have zero spread (s_e = 0)".into(),
            ));
        }
        Ok(ObservedChange {
            crowd: (crowd_error(after) - crowd_error(before)) / var,
            individual: (individual_error(after) - individual_error(before)) / var,
            s_e2_before: var,
        })
    }
}
