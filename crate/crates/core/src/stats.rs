//! Population moments (divide by `n`) shared by every analysis.
//!
//! Correlations follow `r(a, b) = cov(a, b) / (s_a s_b)`. Where a standard
//! deviation vanishes the correlation itself is undefined, so callers that
//! need `s_a * r(a, b)` should use [`std_times_correlation`], which reduces to
//! `cov(a, b) / s_b` and stays finite.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64
}

/// Pearson correlation, `None` when either side has zero spread.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let sa = std_dev(a);
    let sb = std_dev(b);
    if sa == 0.0 || sb == 0.0 {
        return None;
    }
    Some((covariance(a, b) / (sa * sb)).clamp(-1.0, 1.0))
}

/// `s_b * r(a, b)` evaluated as `cov(a, b) / s_a`; zero when `b` is constant.
///
/// `a` must have nonzero spread.
pub fn std_times_correlation(a: &[f64], b: &[f64]) -> f64 {
    let sa = std_dev(a);
    let c = covariance(a, b);
    if c == 0.0 {
        0.0
    } else {
        c / sa
    }
}

pub fn squares(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| x * x).collect()
}

/// Linear-interpolated quantile of already sorted data, `q` in `[0, 1]`.
pub fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
