//! Synthetic trials produced by the DeGroot dynamics, for exercising the
//! pipeline without the original experimental data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{asymptotic_consensus, iterate_to_convergence, ConvergenceOptions};
use crate::empirical::trials::{Condition, SubjectEstimate, TrialRecord};
use crate::error::{Error, Result};
use crate::network::{
    generate, leading_influence_vector, GeneratorParams, NetworkKind, PowerIterationOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticMode {
    /// Post estimates are the converged DeGroot state.
    Converged,
    /// Post estimates move a fraction `lambda` of the way from the pre
    /// estimate to the asymptotic consensus.
    Partial { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub experiments: usize,
    pub groups_per_experiment: usize,
    pub questions_per_group: usize,
    pub group_size: (usize, usize),
    pub seed: u64,
    pub mode: SyntheticMode,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            experiments: 3,
            groups_per_experiment: 10,
            questions_per_group: 3,
            group_size: (4, 12),
            seed: 1,
            mode: SyntheticMode::Converged,
        }
    }
}

/// Experiments cycle through decentralized, centralized and discussion
/// conditions, using random, star and low-concentration random networks
/// respectively. Each group keeps one network across its questions.
pub fn synthetic_trials(cfg: &SyntheticConfig) -> Result<Vec<TrialRecord>> {
    let (lo, hi) = cfg.group_size;
    if lo < 2 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "bad group size range {lo}..={hi}"
        )));
    }
    if let SyntheticMode::Partial { lambda } = cfg.mode {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be in [0, 1], got {lambda}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let conditions = [
        Condition::Decentralized,
        Condition::Centralized,
        Condition::Discussion,
    ];
    let mut out = Vec::new();
    for x in 0..cfg.experiments {
        let condition = conditions[x % conditions.len()];
        for g in 0..cfg.groups_per_experiment {
            let n = rng.random_range(lo..=hi);
            let (kind, params) = match condition {
                Condition::Centralized => (
                    NetworkKind::Star,
                    GeneratorParams {
                        hub_weight: rng.random_range(0.3..0.9),
                        ..Default::default()
                    },
                ),
                Condition::Discussion => (
                    NetworkKind::RandomRowStochastic,
                    GeneratorParams {
                        concentration: 0.3,
                        ..Default::default()
                    },
                ),
                _ => (NetworkKind::RandomRowStochastic, GeneratorParams::default()),
            };
            let matrix = generate(kind, n, rng.random(), &params)?;
            let v = leading_influence_vector(&matrix, PowerIterationOptions::default())?;
            for q in 0..cfg.questions_per_group {
                let truth: f64 = rng.random_range(50.0..150.0);
                let pre: Vec<f64> = (0..n).map(|_| truth * rng.random_range(0.4..1.8)).collect();
                let post = match cfg.mode {
                    SyntheticMode::Converged => iterate_to_convergence(
                        &matrix,
                        &pre,
                        ConvergenceOptions {
                            tol: 1e-12,
                            ..Default::default()
                        },
                    )?
                    .final_state()
                    .to_vec(),
                    SyntheticMode::Partial { lambda } => {
                        let c = asymptotic_consensus(&v, &pre)?;
                        pre.iter().map(|p| p + lambda * (c - p)).collect()
                    }
                };
                out.push(TrialRecord {
                    experiment_id: format!("exp{x}"),
                    trial_id: format!("g{g}"),
                    condition,
                    question_id: format!("q{q}"),
                    truth,
                    subjects: pre
                        .iter()
                        .zip(&post)
                        .enumerate()
                        .map(|(i, (&a, &b))| SubjectEstimate {
                            subject_id: format!("exp{x}-g{g}-s{i}"),
                            estimate_pre: a,
                            estimate_post: b,
                        })
                        .collect(),
                });
            }
        }
    }
    Ok(out)
}
