//! The spine under the rooted (Peyrière) measure.
//!
//! Under the rooted measure the gap `β + √(2d)s − X_s(x)` of a fixed cell is
//! a Bessel(3) process started at `β`. Three ways to look at it:
//!
//! * [`SpineMode::Tilted`] draws the cell path itself, which is the law of the
//!   drifted path after the exponential tilt, and keeps only the weight
//!   `(β − W_t)/β` times the probability that each Brownian bridge segment
//!   stays below `β`.
//! * [`SpineMode::Raw`] draws the drifted path under the original law and
//!   carries the full weight including `exp(√(2d)X_t − dt)`. Exact, but the
//!   effective sample size collapses as `t` grows.
//! * [`SpineMode::Unweighted`] uses the raw drifted path with unit weights, a
//!   negative control that should be rejected.

use super::bessel::bessel3_cdf;
use super::ks::{weighted_ks, DistTestReport};
use crate::error::{invalid, Result};
use crate::field::FieldSampler;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpineMode {
    Tilted,
    Raw,
    Unweighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineReport {
    pub mode: SpineMode,
    pub beta: f64,
    pub t: f64,
    /// Time at which the gap is compared with the Bessel law.
    pub s: f64,
    pub layers: usize,
    pub report: DistTestReport,
}

/// Gap values and weights for each replica.
pub fn spine_samples(
    sampler: &FieldSampler<f64>,
    cell: usize,
    beta: f64,
    s: f64,
    mode: SpineMode,
    master: u64,
    replicas: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if cell >= sampler.grid().cell_count() {
        return Err(invalid(format!("cell {cell} is outside the grid")));
    }
    let ladder = sampler.ladder().clone();
    let k = ladder
        .position(s)
        .ok_or_else(|| invalid(format!("s = {s} is not a ladder time")))?;
    let c = (2.0 * sampler.grid().dimension() as f64).sqrt();
    let t = ladder.t_max();
    let paths = sampler.scan_replicas(master, 0..replicas, |run| run.values()[cell]);
    let out = paths
        .into_iter()
        .map(|x| {
            let drift = |j: usize| match mode {
                SpineMode::Tilted => 0.0,
                SpineMode::Raw | SpineMode::Unweighted => c * ladder.time(j),
            };
            let w: Vec<f64> = x.iter().enumerate().map(|(j, v)| v - drift(j)).collect();
            let gap = beta - w[k];
            let weight = match mode {
                SpineMode::Unweighted => 1.0,
                SpineMode::Tilted | SpineMode::Raw => {
                    let survival = bridge_survival(&w, ladder.times(), beta);
                    let last = *w.last().unwrap();
                    let tilt = if mode == SpineMode::Raw {
                        (c * x.last().unwrap() - 0.5 * c * c * t).exp()
                    } else {
                        1.0
                    };
                    (beta - last).max(0.0) / beta * survival * tilt
                }
            };
            (gap, weight)
        })
        .unzip();
    Ok(out)
}

/// Probability that a Brownian path pinned at `w` on `times` stays below `beta`.
pub fn bridge_survival(w: &[f64], times: &[f64], beta: f64) -> f64 {
    if w.iter().any(|&v| v >= beta) {
        return 0.0;
    }
    w.windows(2)
        .zip(times.windows(2))
        .map(|(v, s)| 1.0 - (-2.0 * (beta - v[0]) * (beta - v[1]) / (s[1] - s[0])).exp())
        .product()
}

/// Weighted KS of the gap at `s = t/2` against the Bessel(3) law from `β`.
pub fn spine_bessel_test(
    sampler: &FieldSampler<f64>,
    cell: usize,
    beta: f64,
    mode: SpineMode,
    master: u64,
    replicas: u64,
    min_ess: f64,
) -> Result<SpineReport> {
    let t = sampler.ladder().t_max();
    let s = 0.5 * t;
    let (gaps, weights) = spine_samples(sampler, cell, beta, s, mode, master, replicas)?;
    let report = weighted_ks(&gaps, &weights, |r| bessel3_cdf(r, beta, s), min_ess)?;
    Ok(SpineReport {
        mode,
        beta,
        t,
        s,
        layers: sampler.ladder().layers(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Backend, GridSpec, ScaleLadder, SupMode};
    use crate::kernels::{SeedKernel, StarCovariance};

    fn sampler(t: f64, dt: f64) -> FieldSampler<f64> {
        let cov = StarCovariance::new(SeedKernel::triangle(1.0).unwrap());
        let grid = GridSpec::new(1, 2, 1.0).unwrap();
        FieldSampler::new(cov, grid, ScaleLadder::uniform(t, dt).unwrap(), Backend::Cholesky, SupMode::Boundary).unwrap()
    }

    #[test]
    fn survival_of_single_segment() {
        let p = bridge_survival(&[0.0, 0.5], &[0.0, 2.0], 1.0);
        assert!((p - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert_eq!(bridge_survival(&[0.0, 1.0], &[0.0, 1.0], 1.0), 0.0);
    }

    #[test]
    fn tilted_spine_follows_bessel() {
        let s = sampler(4.0, 0.25);
        let r = spine_bessel_test(&s, 0, 1.0, SpineMode::Tilted, 11, 20_000, 100.0).unwrap();
        assert!(!r.report.inconclusive);
        assert!(r.report.p_value > 0.001, "{r:?}");
    }

    #[test]
    fn unweighted_control_is_rejected() {
        let s = sampler(10.0, 0.5);
        let r = spine_bessel_test(&s, 0, 1.0, SpineMode::Unweighted, 12, 5_000, 100.0).unwrap();
        assert!(r.report.p_value < 0.01);
    }

    #[test]
    fn raw_weights_collapse_at_depth() {
        let s = sampler(8.0, 0.5);
        let r = spine_bessel_test(&s, 0, 2.0, SpineMode::Raw, 13, 2_000, 100.0).unwrap();
        assert!(r.report.ess.unwrap() < 2_000.0);
    }

    #[test]
    fn s_must_be_on_ladder() {
        let s = sampler(4.0, 0.3);
        assert!(spine_samples(&s, 0, 1.0, 1.7, SpineMode::Tilted, 1, 10).is_err());
    }
}
