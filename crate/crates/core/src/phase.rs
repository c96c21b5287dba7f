//! Phase diagrams of predicted error change over calibration x herding or
//! truth alignment x crowd bias.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{crowd_error_change_from_alpha, improvement_regions, Z_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub c_v: f64,
    pub s_e: f64,
    pub s_e2: f64,
    pub s_d2: f64,
    /// Standardized crowd bias; ignored on the alpha x z axes.
    pub z: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        PhaseParams {
            c_v: 2.0,
            s_e: 1.0,
            s_e2: 1.0,
            s_d2: 1.0,
            z: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseAxes {
    /// axis1 = calibration `-r(v, e^2)`, axis2 = herding `-r(v, d^2)`.
    CalibrationHerding {
        calibration: (f64, f64),
        herding: (f64, f64),
    },
    /// axis1 = truth alignment, axis2 = standardized crowd bias.
    AlphaZ { alpha: (f64, f64), z: (f64, f64) },
}

impl PhaseAxes {
    pub fn calibration_herding() -> Self {
        PhaseAxes::CalibrationHerding {
            calibration: (-1.0, 1.0),
            herding: (-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub axis1: f64,
    pub axis2: f64,
    pub alpha: f64,
    pub crowd_change: f64,
    pub individual_change: f64,
    pub crowd_improves: bool,
    pub individual_improves: bool,
    /// `|alpha| <= |z| c_v` and `z` nonzero. Infeasible cells keep their
    /// computed values but must not be read as attainable.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub params: PhaseParams,
    pub axes: PhaseAxes,
    pub resolution: usize,
    /// Row-major: axis2 varies slowest.
    #[serde(skip)]
    pub cells: Vec<PhaseCell>,
}

fn linspace((lo, hi): (f64, f64), k: usize, res: usize) -> f64 {
    if k == res - 1 {
        hi
    } else {
        lo + (hi - lo) * k as f64 / (res - 1) as f64
    }
}

fn evaluate(axis1: f64, axis2: f64, alpha: f64, z: f64, c_v: f64) -> PhaseCell {
    let nonzero = z.abs() > Z_EPS;
    let (crowd_change, regions) = if nonzero {
        (
            crowd_error_change_from_alpha(alpha, z).unwrap_or(f64::NAN),
            improvement_regions(alpha, z).ok(),
        )
    } else {
        (f64::NAN, None)
    };
    let regions = regions.unwrap_or(crate::metrics::ImprovementRegions {
        crowd_improves: false,
        individual_improves: false,
    });
    PhaseCell {
        axis1,
        axis2,
        alpha,
        crowd_change,
        individual_change: crowd_change - 1.0,
        crowd_improves: regions.crowd_improves,
        individual_improves: regions.individual_improves,
        // a small slack absorbs rounding in alpha on the feasibility edge
        feasible: nonzero && alpha.abs() <= z.abs() * c_v * (1.0 + 1e-12),
    }
}

/// Evaluates the asymptotic error changes on a `resolution x resolution`
/// grid.
///
/// On calibration x herding axes, `alpha = c_v / (2 s_e^2) *
/// (s(e^2) calibration - s(d^2) herding)`; the crowd bias `z` must be
/// nonzero there because the change is not a function of alpha at `z = 0`.
pub fn phase_grid(params: PhaseParams, axes: PhaseAxes, resolution: usize) -> Result<PhaseGrid> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    if !(params.s_e > 0.0) || params.c_v < 0.0 {
        return Err(Error::InvalidParameter("need s_e > 0 and c_v >= 0".into()));
    }
    if let PhaseAxes::CalibrationHerding { .. } = axes {
        if !(params.z.abs() > Z_EPS) {
            return Err(Error::Degenerate(format!(
                "calibration/herding grid needs nonzero z, got {}",
                params.z
            )));
        }
    }
    let scale = params.c_v / (2.0 * params.s_e * params.s_e);
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % resolution, k / resolution);
            match axes {
                PhaseAxes::CalibrationHerding {
                    calibration,
                    herding,
                } => {
                    let cal = linspace(calibration, i, resolution);
                    let herd = linspace(herding, j, resolution);
                    let alpha = scale * (params.s_e2 * cal - params.s_d2 * herd);
                    evaluate(cal, herd, alpha, params.z, params.c_v)
                }
                PhaseAxes::AlphaZ { alpha, z } => {
                    let a = linspace(alpha, i, resolution);
                    let zz = linspace(z, j, resolution);
                    evaluate(a, zz, a, zz, params.c_v)
                }
            }
        })
        .collect();
    Ok(PhaseGrid {
        params,
        axes,
        resolution,
        cells,
    })
}

impl PhaseGrid {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "axis1",
            "axis2",
            "alpha",
            "crowd_change",
            "individual_change",
            "crowd_improves",
            "individual_improves",
            "feasible",
        ])?;
        for c in &self.cells {
            wtr.write_record([
                format!("{:?}", c.axis1),
                format!("{:?}", c.axis2),
                format!("{:?}", c.alpha),
                format!("{:?}", c.crowd_change),
                format!("{:?}", c.individual_change),
                c.crowd_improves.to_string(),
                c.individual_improves.to_string(),
                c.feasible.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Fixed parameters and axis definitions, without the cells.
    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
