//! DeGroot belief updating: `x_{t+1} = W x_t`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CentralityVector, InfluenceMatrix};
use crate::stats;

/// Opinions together with the derived bias (against an optional truth) and
/// distance-from-mean vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub x: Vec<f64>,
    pub truth: Option<f64>,
    pub e: Option<Vec<f64>>,
    pub d: Vec<f64>,
}

impl BeliefState {
    pub fn new(x: Vec<f64>, truth: Option<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("opinions must be finite".into()));
        }
        if let Some(t) = truth {
            if !t.is_finite() {
                return Err(Error::InvalidParameter("truth must be finite".into()));
            }
        }
        let e = truth.map(|t| bias_transform(&x, t));
        let m = stats::mean(&x);
        let d = x.iter().map(|v| v - m).collect();
        Ok(BeliefState { x, truth, e, d })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Every state when recording, otherwise just the first and last.
    pub states: Vec<Vec<f64>>,
    pub converged: bool,
    pub steps: usize,
    pub spread_final: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    /// One row per recorded state: `step,x_0,...,x_{n-1}`. When only the
    /// endpoints were kept the final row carries the true step count.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let n = self.states[0].len();
        let mut header = vec!["step".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        let last = self.states.len() - 1;
        for (k, state) in self.states.iter().enumerate() {
            let step = if k == last { self.steps } else { k };
            let mut rec = vec![step.to_string()];
            rec.extend(state.iter().map(|v| format!("{v:?}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub record: bool,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            tol: 1e-10,
            max_steps: 100_000,
            record: false,
        }
    }
}

pub fn spread(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

fn check_len(matrix: &InfluenceMatrix, x: &[f64]) -> Result<()> {
    if x.len() != matrix.n() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n(),
            actual: x.len(),
        });
    }
    Ok(())
}

fn step_into(matrix: &InfluenceMatrix, x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(matrix.rows()) {
        *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
    }
}

/// One round of weighted averaging.
pub fn degroot_step(matrix: &InfluenceMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_len(matrix, x)?;
    let mut out = vec![0.0; x.len()];
    step_into(matrix, x, &mut out);
    Ok(out)
}

/// Repeats [`degroot_step`] until both the step change and the opinion spread
/// fall below `tol`. Running out of steps is reported through
/// `converged = false`, not as an error.
pub fn iterate_to_convergence(
    matrix: &InfluenceMatrix,
    x0: &[f64],
    opts: ConvergenceOptions,
) -> Result<Trajectory> {
    check_len(matrix, x0)?;
    let mut states = vec![x0.to_vec()];
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; x0.len()];
    let mut converged = false;
    let mut steps = 0;
    while steps < opts.max_steps {
        step_into(matrix, &cur, &mut next);
        steps += 1;
        let delta = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        if opts.record {
            states.push(cur.clone());
        }
        if delta < opts.tol && spread(&cur) < opts.tol {
            converged = true;
            break;
        }
    }
    if !opts.record && steps > 0 {
        states.push(cur.clone());
    }
    Ok(Trajectory {
        spread_final: spread(&cur),
        states,
        converged,
        steps,
    })
}

/// The common limit opinion `sum_j v_j x_j`.
pub fn asymptotic_consensus(v: &CentralityVector, x0: &[f64]) -> Result<f64> {
    if v.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            actual: x0.len(),
        });
    }
    Ok(v.as_slice().iter().zip(x0).map(|(a, b)| a * b).sum())
}

pub fn bias_transform(x: &[f64], truth: f64) -> Vec<f64> {
    x.iter().map(|v| v - truth).collect()
}

/// Reads a single-column CSV of opinions. A non-numeric first line is taken
/// as a header and skipped.
pub fn load_opinions(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_opinions(&text)
}

pub fn parse_opinions(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim().trim_end_matches(',');
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => {
                return Err(Error::Malformed(format!(
                    "line {}: non-finite opinion",
                    i + 1
                )))
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Malformed(format!(
                    "line {}: cannot parse opinion {field:?}",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn write_opinions<W: std::io::Write>(x: &[f64], mut writer: W) -> Result<()> {
    for v in x {
        writeln!(writer, "{v:?}")?;
    }
    Ok(())
}
