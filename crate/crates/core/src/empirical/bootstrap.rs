//! Percentile bootstrap with per-resample derived random streams, so results
//! are independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::sorted_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    /// Same settings with a seed mixed with `salt`, for independent analyses
    /// sharing one user seed.
    pub fn salted(&self, salt: u64) -> Self {
        BootstrapConfig {
            seed: derive_seed(self.seed, salt),
            ..*self
        }
    }
}

/// SplitMix64 finalizer over `seed + salt * golden`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Percentile interval of `statistic` over resamples (with replacement) of
/// `data`. Resamples on which the statistic is undefined are skipped.
pub fn bootstrap_ci<T, F>(statistic: F, data: &[T], cfg: &BootstrapConfig) -> Result<(f64, f64)>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Option<f64> + Sync,
{
    if cfg.resamples < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 bootstrap resamples, got {}",
            cfg.resamples
        )));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must be in (0, 1), got {}",
            cfg.level
        )));
    }
    if data.is_empty() {
        return Err(Error::InsufficientData(
            "cannot bootstrap an empty sample".into(),
        ));
    }
    let n = data.len();
    let mut values: Vec<f64> = (0..cfg.resamples as u64)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r);
            let sample: Vec<T> = (0..n)
                .map(|_| data[rng.random_range(0..n)].clone())
                .collect();
            statistic(&sample).filter(|v| v.is_finite())
        })
        .collect();
    if values.is_empty() {
        return Err(Error::Degenerate(
            "statistic undefined on every resample".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.level) / 2.0;
    Ok((
        sorted_quantile(&values, tail),
        sorted_quantile(&values, 1.0 - tail),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> Option<f64> {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }

    #[test]
    fn constant_data_gives_zero_width() {
        let data = vec![2.5; 30];
        assert_eq!(
            bootstrap_ci(mean, &data, &BootstrapConfig::default()).unwrap(),
            (2.5, 2.5)
        );
    }

    #[test]
    fn brackets_half_for_balanced_coin() {
        let data: Vec<f64> = (0..400).map(|i| (i % 2) as f64).collect();
        let (lo, hi) = bootstrap_ci(mean, &data, &BootstrapConfig::default()).unwrap();
        assert!(lo < 0.5 && 0.5 < hi, "({lo}, {hi})");
        assert!(hi - lo < 0.2);
    }

    #[test]
    fn deterministic_under_seed() {
        let data: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let cfg = BootstrapConfig {
            seed: 42,
            ..Default::default()
        };
        let a = bootstrap_ci(mean, &data, &cfg).unwrap();
        let b = bootstrap_ci(mean, &data, &cfg).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        let c = bootstrap_ci(mean, &data, &cfg.salted(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_too_few_resamples() {
        let cfg = BootstrapConfig {
            resamples: 99,
            ..Default::default()
        };
        assert!(bootstrap_ci(mean, &[1.0, 2.0], &cfg).is_err());
    }
}
