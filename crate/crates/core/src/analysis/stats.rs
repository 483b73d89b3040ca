//! Small descriptive and resampling statistics.

use crate::error::{invalid, Result};
use crate::rng::{Purpose, StreamKey};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub replicas: usize,
}

impl MeanEstimate {
    /// `|mean − target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_err
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

pub fn mean_se(xs: &[f64]) -> MeanEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        f64::INFINITY
    };
    MeanEstimate {
        mean,
        std_err: (var / n).sqrt(),
        replicas: xs.len(),
    }
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Delete-one-group jackknife: `estimate(excluded_group)` for each group, plus
/// the full-sample estimate from `estimate(None)`.
pub fn group_jackknife<F: Fn(Option<usize>) -> f64>(groups: usize, estimate: F) -> (f64, f64) {
    let full = estimate(None);
    let loo: Vec<f64> = (0..groups).map(|g| estimate(Some(g))).collect();
    let g = groups as f64;
    let m = loo.iter().sum::<f64>() / g;
    let se = ((g - 1.0) / g * loo.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt();
    (full, se)
}

/// Wilson score interval for a binomial proportion at `z` standard deviations.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Percentile bootstrap interval of a statistic.
pub fn bootstrap_interval<F: Fn(&[f64]) -> f64>(
    xs: &[f64],
    statistic: F,
    resamples: usize,
    level: f64,
    master: u64,
) -> Result<(f64, f64)> {
    if xs.is_empty() || resamples == 0 {
        return Err(invalid("bootstrap needs data and at least one resample"));
    }
    let mut rng = StreamKey::new(master, 0, 0, Purpose::Bootstrap).rng();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let sample: Vec<f64> = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).collect();
            statistic(&sample)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&stats, a), quantile_sorted(&stats, 1.0 - a)))
}
