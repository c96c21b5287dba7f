use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use degroot_core::dynamics::{load_opinions, spread};
use degroot_core::empirical::{
    load_trials, reanalyze, BootstrapConfig, GroupOutcomeRule, Metric, ReanalysisConfig,
    TrialFilter,
};
use degroot_core::metrics::{
    crowd_error_change_from_alpha, individual_error_change_from_alpha, ObservedChange,
};
use degroot_core::verify::{verify_ensemble, VerifyConfig};
use degroot_core::{
    asymptotic_consensus, bias_transform, generate, influence_centralization,
    iterate_to_convergence, leading_influence_vector, phase_grid, stats, validate,
    ConvergenceOptions, CrowdStats, GeneratorParams, InfluenceMatrix, NetworkKind, PhaseAxes,
    PhaseParams, PowerIterationOptions, Prediction,
};

use crate::output::{sidecar_path, Outputs};
use crate::{
    AxesKind, CliError, Command, Failure, FilterChoice, GroupRuleChoice, MetricChoice, NetworkArgs,
    PredictArgs, ReanalyzeArgs, SimulateArgs, SweepArgs, VerifyArgs,
};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Predict(a) => predict(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Reanalyze(a) => reanalyze_cmd(a),
    }
}

fn validation(message: impl Into<String>) -> CliError {
    CliError {
        failure: Failure::Validation,
        message: message.into(),
    }
}

fn at(path: &Path, e: degroot_core::Error) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s.into_bytes()
}

fn emit(out: Option<&Path>, bytes: Vec<u8>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut o = Outputs::default();
            o.add(path, bytes);
            o.commit()?;
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Loads or generates the network and initial opinions.
fn setup(a: &NetworkArgs) -> Result<(InfluenceMatrix, Vec<f64>), CliError> {
    let matrix = match a.network.parse::<NetworkKind>() {
        Ok(kind) => {
            let n =
                a.n.ok_or_else(|| validation("--n is required with a generated network"))?;
            let params = GeneratorParams {
                dominance: a.dominance,
                hub_weight: a.hub_weight,
                min_self_weight: a.min_self_weight,
                concentration: a.concentration,
            };
            generate(kind, n, a.seed, &params)?
        }
        Err(_) => {
            let path = Path::new(&a.network);
            InfluenceMatrix::load_csv(path).map_err(|e| at(path, e))?
        }
    };
    let opinions = match &a.opinions {
        Some(path) => load_opinions(path).map_err(|e| at(path, e))?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x6f70_696e_696f_6e73);
            (0..matrix.n())
                .map(|_| rng.random_range(-10.0..10.0))
                .collect()
        }
    };
    if opinions.len() != matrix.n() {
        return Err(validation(format!(
            "network has {} agents but {} opinions were given",
            matrix.n(),
            opinions.len()
        )));
    }
    if !a.truth.is_finite() {
        return Err(validation("--truth must be finite"));
    }
    Ok((matrix, opinions))
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let (matrix, x0) = setup(&a.network)?;
    let diagnostics = validate(&matrix);
    let opts = ConvergenceOptions {
        tol: a.tol,
        max_steps: a.max_steps,
        record: a.record,
    };
    let traj = iterate_to_convergence(&matrix, &x0, opts)?;

    let centrality = diagnostics
        .is_valid()
        .then(|| {
            leading_influence_vector(
                &matrix,
                PowerIterationOptions {
                    tol: a.network.eig_tol,
                    ..Default::default()
                },
            )
        })
        .transpose()?;
    let e0 = bias_transform(&x0, a.network.truth);
    let e_final = bias_transform(traj.final_state(), a.network.truth);
    let initial_stats = centrality
        .as_ref()
        .map(|v| CrowdStats::compute(v, &e0))
        .transpose()
        .ok()
        .flatten();

    let report = json!({
        "n": matrix.n(),
        "diagnostics": diagnostics,
        "centrality": centrality,
        "c_v": centrality.as_ref().map(influence_centralization),
        "truth": a.network.truth,
        "trajectory": {
            "converged": traj.converged,
            "steps": traj.steps,
            "spread_final": traj.spread_final,
            "spread_initial": spread(&x0),
        },
        "consensus": {
            "simulated_mean": stats::mean(traj.final_state()),
            "asymptotic": centrality.as_ref().map(|v| asymptotic_consensus(v, &x0)).transpose()?,
        },
        "initial_stats": initial_stats,
        "observed_change": ObservedChange::between(&e0, &e_final).ok(),
        "initial_opinions": x0,
        "final_opinions": traj.final_state(),
    });

    match &a.out {
        Some(dir) => {
            let mut traj_csv = Vec::new();
            traj.write_csv(&mut traj_csv)?;
            let mut o = Outputs::default();
            o.add(dir.join("trajectory.csv"), traj_csv);
            o.add(dir.join("stats.json"), to_json(&report));
            o.commit()?;
        }
        None => emit(None, to_json(&report))?,
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let (matrix, x0) = setup(&a.network)?;
    let diagnostics = validate(&matrix);
    let v = leading_influence_vector(
        &matrix,
        PowerIterationOptions {
            tol: a.network.eig_tol,
            ..Default::default()
        },
    )?;
    let e0 = bias_transform(&x0, a.network.truth);
    let p = Prediction::from_biases(&v, &e0)?;
    let report = json!({
        "n": matrix.n(),
        "diagnostics": diagnostics,
        "centrality": v,
        "truth": a.network.truth,
        "consensus_asymptotic": asymptotic_consensus(&v, &x0)?,
        "z": p.stats.z,
        "c_v": p.stats.c_v,
        "r_ve": p.stats.r_ve,
        "calibration": p.stats.calibration,
        "herding": p.stats.herding,
        "delta_z": p.delta_z,
        "alpha": p.alpha,
        "alpha_decomposed": p.alpha_decomposed,
        "crowd_change": p.crowd_change,
        "individual_change": p.individual_change,
        "crowd_change_raw": p.crowd_change_raw,
        "individual_change_raw": p.individual_change_raw,
        "crowd_change_alpha_form": crowd_error_change_from_alpha(p.alpha, p.stats.z).ok(),
        "individual_change_alpha_form": individual_error_change_from_alpha(p.alpha, p.stats.z).ok(),
        "regions": p.regions,
        "stats": p.stats,
    });
    emit(a.out.as_deref(), to_json(&report))
}

fn parse_range(s: Option<&str>, default: (f64, f64)) -> Result<(f64, f64), CliError> {
    let Some(s) = s else { return Ok(default) };
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => {
            let lo: f64 = lo
                .parse()
                .map_err(|_| validation(format!("bad range {s:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| validation(format!("bad range {s:?}")))?;
            if !(lo < hi) {
                return Err(validation(format!("range {s:?} must have lo < hi")));
            }
            Ok((lo, hi))
        }
        _ => Err(validation(format!("range must look like lo,hi; got {s:?}"))),
    }
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let params = PhaseParams {
        c_v: a.cv,
        s_e: a.se,
        s_e2: a.se2,
        s_d2: a.sd2,
        z: a.z,
    };
    let axes = match a.axes {
        AxesKind::CalibrationHerding => PhaseAxes::CalibrationHerding {
            calibration: parse_range(a.range1.as_deref(), (-1.0, 1.0))?,
            herding: parse_range(a.range2.as_deref(), (-1.0, 1.0))?,
        },
        AxesKind::AlphaZ => {
            let bound = a.cv * 2.0;
            PhaseAxes::AlphaZ {
                alpha: parse_range(a.range1.as_deref(), (-bound, bound))?,
                z: parse_range(a.range2.as_deref(), (-2.0, 2.0))?,
            }
        }
    };
    let grid = phase_grid(params, axes, a.resolution)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    match &a.out {
        Some(path) => {
            let mut o = Outputs::default();
            o.add(path, csv);
            o.add(
                sidecar_path(path),
                (grid.sidecar_json()? + "\n").into_bytes(),
            );
            o.commit()?;
        }
        None => emit(None, csv)?,
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    if a.trials == 0 || a.nmax < 2 {
        return Err(validation("need --trials >= 1 and --nmax >= 2"));
    }
    let config = VerifyConfig {
        trials: a.trials,
        n_max: a.nmax,
        seed: a.seed,
        tolerance: a.tol,
        sim_tol: a.sim_tol,
        max_steps: a.max_steps,
    };
    let (report, _) = verify_ensemble(config)?;
    emit(a.out.as_deref(), to_json(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError {
            failure: Failure::Verification,
            message: format!(
                "max relative deviation crowd {:e} / individual {:e} exceeds {:e} ({} non-converged)",
                report.max_crowd_deviation, report.max_individual_deviation, a.tol, report.non_converged
            ),
        })
    }
}

fn reanalyze_cmd(a: ReanalyzeArgs) -> Result<(), CliError> {
    let loaded = load_trials(&a.trials).map_err(|e| at(&a.trials, e))?;
    let metrics = match a.metric {
        MetricChoice::Both => Metric::BOTH.to_vec(),
        MetricChoice::Conditional => vec![Metric::ConditionalOnRevision],
        MetricChoice::ImproveOrStay => vec![Metric::ImproveOrStay],
    };
    let group_rules = match a.group_rule {
        GroupRuleChoice::Both => vec![GroupOutcomeRule::Strict, GroupOutcomeRule::NotWorse],
        GroupRuleChoice::Strict => vec![GroupOutcomeRule::Strict],
        GroupRuleChoice::NotWorse => vec![GroupOutcomeRule::NotWorse],
    };
    let filter = match a.filter {
        FilterChoice::Threshold => TrialFilter::Threshold,
        FilterChoice::PositiveOffset => TrialFilter::PositiveOffset,
    };
    if !(a.threshold >= 0.0) {
        return Err(validation("--threshold must be non-negative"));
    }
    if a.resamples < 100 {
        return Err(validation("--resamples must be at least 100"));
    }
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(validation("--level must be in (0, 1)"));
    }
    let config = ReanalysisConfig {
        threshold: a.threshold,
        filter,
        metrics,
        group_rules,
        bootstrap: BootstrapConfig {
            resamples: a.resamples,
            level: a.level,
            seed: a.seed,
        },
    };
    let report = reanalyze(&loaded, &config);
    match &a.out {
        Some(dir) => {
            let mut changes = Vec::new();
            report.write_changes_csv(&mut changes)?;
            let mut improvement = Vec::new();
            report.write_improvement_csv(&mut improvement)?;
            let mut quartiles = Vec::new();
            report.write_quartiles_csv(&mut quartiles)?;
            let mut o = Outputs::default();
            o.add(dir.join("report.json"), to_json(&report));
            o.add(dir.join("changes.csv"), changes);
            o.add(dir.join("improvement.csv"), improvement);
            o.add(dir.join("quartiles.csv"), quartiles);
            o.commit()?;
        }
        None => emit(None, to_json(&report))?,
    }
    Ok(())
}
