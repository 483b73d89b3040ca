//! Recentred maxima `sup_x X_t(x) − √(2d)t + (3/(2√(2d))) ln t`.

use super::stats::{bootstrap_interval, quantile};
use crate::error::{invalid, Result};
use crate::field::FieldRun;
use crate::rng::StreamKey;
use serde::Serialize;

/// `√(2d)t − (3/(2√(2d))) ln t`, with `ln t` read as 0 at `t = 0`.
pub fn recentering(t: f64, d: usize) -> f64 {
    let c = (2.0 * d as f64).sqrt();
    let log_t = if t == 0.0 { 0.0 } else { t.ln() };
    c * t - 3.0 / (2.0 * c) * log_t
}

pub fn max_statistic(run: &FieldRun<f64>) -> f64 {
    let sup = run.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    sup - recentering(run.t(), run.grid().dimension())
}

pub const LEVELS: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxRow {
    pub t: f64,
    pub replicas: usize,
    /// Empirical 10/50/90% quantiles.
    pub quantiles: [f64; 3],
    /// 95% percentile-bootstrap band per quantile.
    pub bands: [(f64, f64); 3],
    /// The grid does not resolve the `e^{-t}` scale (`n < e^t` per axis).
    pub under_resolved: bool,
}

impl MaxRow {
    pub fn interquartile_proxy(&self) -> f64 {
        self.quantiles[2] - self.quantiles[0]
    }
}

/// Quantile table from per-`t` statistic samples taken on grids with
/// `cells_per_axis` cells per axis of the unit cube.
pub fn max_statistics(
    samples: &[(f64, Vec<f64>)],
    cells_per_axis: usize,
    resamples: usize,
    master: u64,
) -> Result<Vec<MaxRow>> {
    samples
        .iter()
        .enumerate()
        .map(|(k, (t, xs))| {
            if xs.is_empty() {
                return Err(invalid(format!("no samples at t = {t}")));
            }
            let quantiles = LEVELS.map(|p| quantile(xs, p));
            let mut bands = [(0.0, 0.0); 3];
            for (b, &p) in bands.iter_mut().zip(&LEVELS) {
                *b = bootstrap_interval(xs, |s| quantile(s, p), resamples, 0.95, StreamKey::derive_master(master, k as u64))?;
            }
            Ok(MaxRow {
                t: *t,
                replicas: xs.len(),
                quantiles,
                bands,
                under_resolved: (cells_per_axis as f64) < t.exp(),
            })
        })
        .collect()
}
