//! Seeded ensembles comparing closed-form predictions with direct
//! simulation of the dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{bias_transform, iterate_to_convergence, ConvergenceOptions};
use crate::error::Result;
use crate::metrics::{alpha_from_vectors, CrowdStats, ObservedChange};
use crate::network::{
    generate, influence_centralization, leading_influence_vector, CentralityVector,
    GeneratorParams, InfluenceMatrix, NetworkKind, PowerIterationOptions,
};
use crate::stats;

/// One random (network, opinions, truth) triple.
#[derive(Debug, Clone)]
pub struct EnsembleCase {
    pub matrix: InfluenceMatrix,
    pub opinions: Vec<f64>,
    pub truth: f64,
}

/// Deterministic case `index` of the ensemble keyed by `seed`: `n` uniform
/// in `[2, n_max]`, a random row-stochastic network, opinions uniform in
/// `[-10, 10]` and a truth uniform in `[-10, 10]`.
pub fn ensemble_case(seed: u64, index: u64, n_max: usize) -> Result<EnsembleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.random_range(2..=n_max.max(2));
    let net_seed: u64 = rng.random();
    let matrix = generate(
        NetworkKind::RandomRowStochastic,
        n,
        net_seed,
        &GeneratorParams::default(),
    )?;
    let opinions = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    let truth = rng.random_range(-10.0..10.0);
    Ok(EnsembleCase {
        matrix,
        opinions,
        truth,
    })
}

/// Relative deviation with a unit floor on the scale, so values near zero
/// are compared absolutely.
pub fn relative_deviation(observed: f64, expected: f64) -> f64 {
    (observed - expected).abs() / expected.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub n: usize,
    pub converged: bool,
    pub predicted_crowd: f64,
    pub simulated_crowd: f64,
    pub predicted_individual: f64,
    pub simulated_individual: f64,
    /// Simulated crowd minus individual change; exactly 1 at consensus.
    pub simulated_offset: f64,
    pub alpha: f64,
    pub alpha_decomposed: f64,
    pub z: f64,
    pub c_v: f64,
    pub delta_z_simulated: f64,
}

impl CaseOutcome {
    pub fn crowd_deviation(&self) -> f64 {
        relative_deviation(self.simulated_crowd, self.predicted_crowd)
    }

    pub fn individual_deviation(&self) -> f64 {
        relative_deviation(self.simulated_individual, self.predicted_individual)
    }
}

/// Runs one case both ways.
pub fn run_case(case: &EnsembleCase, sim: ConvergenceOptions) -> Result<CaseOutcome> {
    let v: CentralityVector =
        leading_influence_vector(&case.matrix, PowerIterationOptions::default())?;
    let e0 = bias_transform(&case.opinions, case.truth);
    let crowd = CrowdStats::compute(&v, &e0)?;

    let traj = iterate_to_convergence(&case.matrix, &case.opinions, sim)?;
    let e_final = bias_transform(traj.final_state(), case.truth);
    let observed = ObservedChange::between(&e0, &e_final)?;

    Ok(CaseOutcome {
        n: case.opinions.len(),
        converged: traj.converged,
        predicted_crowd: crowd.crowd_change(),
        simulated_crowd: observed.crowd,
        predicted_individual: crowd.individual_change(),
        simulated_individual: observed.individual,
        simulated_offset: observed.crowd - observed.individual,
        alpha: crowd.alpha,
        alpha_decomposed: alpha_from_vectors(&v, &e0)?,
        z: crowd.z,
        c_v: influence_centralization(&v),
        delta_z_simulated: (stats::mean(&e_final) - crowd.mean_bias) / crowd.s_e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub n_max: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub sim_tol: f64,
    pub max_steps: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 1000,
            n_max: 20,
            seed: 7,
            tolerance: 1e-6,
            sim_tol: 1e-10,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub trials: usize,
    pub non_converged: usize,
    pub max_crowd_deviation: f64,
    pub max_individual_deviation: f64,
    pub max_abs_crowd_deviation: f64,
    pub max_abs_individual_deviation: f64,
    pub max_offset_deviation: f64,
    pub max_alpha_mismatch: f64,
    pub passed: bool,
}

/// Runs the whole ensemble (in parallel; the report does not depend on
/// scheduling).
pub fn verify_ensemble(config: VerifyConfig) -> Result<(VerifyReport, Vec<CaseOutcome>)> {
    let sim = ConvergenceOptions {
        tol: config.sim_tol,
        max_steps: config.max_steps,
        record: false,
    };
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|k| run_case(&ensemble_case(config.seed, k, config.n_max)?, sim))
        .collect::<Result<Vec<_>>>()?;

    let max_of = |f: &dyn Fn(&CaseOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
    let max_crowd_deviation = max_of(&|o| o.crowd_deviation());
    let max_individual_deviation = max_of(&|o| o.individual_deviation());
    let non_converged = outcomes.iter().filter(|o| !o.converged).count();
    let report = VerifyReport {
        config,
        trials: outcomes.len(),
        non_converged,
        max_crowd_deviation,
        max_individual_deviation,
        max_abs_crowd_deviation: max_of(&|o| (o.simulated_crowd - o.predicted_crowd).abs()),
        max_abs_individual_deviation: max_of(&|o| {
            (o.simulated_individual - o.predicted_individual).abs()
        }),
        max_offset_deviation: max_of(&|o| (o.simulated_offset - 1.0).abs()),
        max_alpha_mismatch: max_of(&|o| relative_deviation(o.alpha_decomposed, o.alpha)),
        passed: non_converged == 0
            && max_crowd_deviation <= config.tolerance
            && max_individual_deviation <= config.tolerance,
    };
    Ok((report, outcomes))
}
