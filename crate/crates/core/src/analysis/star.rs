//! Distributional check of the ⋆-scale invariance relation.
//!
//! For `ε = e^{-s}` the total mass of a region at depth `t` is compared with
//! the composite built from an independent coarse field at depth `s` and a
//! fine field at depth `t − s` sampled on the dilated domain `[0, L e^s]^d`
//! with the same number of cells. Cell `i` of the fine grid sits at `e^s`
//! times the centre of cell `i` of the coarse grid, so the composite weights
//! line up index by index and the fine cell volume times `ε^d` equals the
//! coarse cell volume.
//!
//! At finite depth the chaos relation is exact. For the derivative measure the
//! gap splits as `(√(2d)s − X_s) + (√(2d)(t−s) − Y)`; [`RhsForm::Exact`] keeps
//! both parts and [`RhsForm::Limit`] keeps only the second, which is the form
//! that survives as `t → ∞`.

use super::ks::{anderson_darling_two_sample, ks_two_sample, DistTestReport, TestKind};
use crate::error::{invalid, Result};
use crate::field::{Backend, FieldSampler, GridSpec, ScaleLadder, SupMode};
use crate::kernels::StarCovariance;
use crate::logspace::SignedLog;
use crate::measures::Region;
use crate::rng::StreamKey;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StarKind {
    /// `exp(γX_t − γ²t/2)` with `γ² ≤ 2d`.
    Chaos { gamma: f64 },
    Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhsForm {
    Exact,
    Limit,
}

#[derive(Debug, Clone)]
pub struct StarSetup {
    pub covariance: StarCovariance,
    pub grid: GridSpec,
    pub backend: Backend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarReport {
    pub kind: StarKind,
    pub form: RhsForm,
    /// Truncation depth of both sides.
    pub t: f64,
    /// `s = ln(1/ε)`.
    pub s: f64,
    pub samples_per_side: usize,
    pub lhs_median: f64,
    pub rhs_median: f64,
    pub report: DistTestReport,
}

const LHS_TAG: u64 = 1;
const COARSE_TAG: u64 = 2;
const FINE_TAG: u64 = 3;

fn sampler(setup: &StarSetup, grid: GridSpec, depth: f64) -> Result<FieldSampler<f64>> {
    FieldSampler::new(
        setup.covariance.clone(),
        grid,
        ScaleLadder::from_times(vec![0.0, depth])?,
        setup.backend,
        SupMode::Boundary,
    )
}

/// `(prefactor, log_weight)` per cell of the chosen density at depth `t`.
fn density(kind: StarKind, values: &[f64], t: f64, d: usize) -> Vec<(f64, f64)> {
    match kind {
        StarKind::Chaos { gamma } => values.iter().map(|x| (1.0, gamma * x - 0.5 * gamma * gamma * t)).collect(),
        StarKind::Derivative => {
            let c = (2.0 * d as f64).sqrt();
            values.iter().map(|x| (c * t - x, c * x - d as f64 * t)).collect()
        }
    }
}

/// Both sides of the relation, `samples` draws each.
pub fn star_samples(
    setup: &StarSetup,
    kind: StarKind,
    form: RhsForm,
    region: &Region,
    s: f64,
    t: f64,
    samples: usize,
    master: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = setup.grid.dimension();
    if !(s >= 0.0 && t >= s && t.is_finite()) {
        return Err(invalid(format!("depths must satisfy 0 ≤ s ≤ t, got s = {s}, t = {t}")));
    }
    if let StarKind::Chaos { gamma } = kind {
        if !(gamma >= 0.0 && gamma * gamma <= 2.0 * d as f64 * (1.0 + 1e-12)) {
            return Err(invalid(format!("the relation is tested for γ² ≤ 2d, got γ = {gamma}")));
        }
    }
    let cells = region.cells(&setup.grid);
    let log_h = d as f64 * setup.grid.spacing().ln();
    let total = |terms: Vec<(f64, f64)>| {
        SignedLog::sum(cells.iter().map(|&i| SignedLog::from_parts(terms[i].0, terms[i].1))).mul_log(log_h).value()
    };
    let replicas = 0..samples as u64;

    let lhs_sampler = sampler(setup, setup.grid, t)?;
    let lhs_master = StreamKey::derive_master(master, LHS_TAG);
    let lhs = lhs_sampler.map_replicas(lhs_master, replicas.clone(), |run| total(density(kind, run.values(), t, d)));

    let fine_grid = GridSpec::new(d, setup.grid.cells_per_axis(), setup.grid.extent() * s.exp())?;
    let fine_sampler = sampler(setup, fine_grid, t - s)?;
    let coarse_sampler = if s > 0.0 { Some(sampler(setup, setup.grid, s)?) } else { None };
    let (coarse_master, fine_master) = (
        StreamKey::derive_master(master, COARSE_TAG),
        StreamKey::derive_master(master, FINE_TAG),
    );
    let rhs = replicas
        .into_par_iter()
        .map(|r| {
            let fine = fine_sampler.run(fine_master, r);
            let coarse = match &coarse_sampler {
                Some(cs) => cs.run(coarse_master, r).values().to_vec(),
                None => vec![0.0; fine.values().len()],
            };
            let inner = density(kind, fine.values(), t - s, d);
            let terms = coarse
                .iter()
                .zip(inner)
                .map(|(&x, (p, lw))| {
                    let (cp, clw) = density(kind, &[x], s, d)[0];
                    let prefactor = match (kind, form) {
                        (StarKind::Derivative, RhsForm::Exact) => p + cp,
                        _ => p,
                    };
                    (prefactor, clw + lw)
                })
                .collect();
            total(terms)
        })
        .collect();
    Ok((lhs, rhs))
}

/// Two-sample test between the two sides (`test` is KS2 or Anderson–Darling).
#[allow(clippy::too_many_arguments)]
pub fn star_equation_test(
    setup: &StarSetup,
    kind: StarKind,
    form: RhsForm,
    region: &Region,
    s: f64,
    t: f64,
    samples: usize,
    test: TestKind,
    master: u64,
) -> Result<StarReport> {
    let (lhs, rhs) = star_samples(setup, kind, form, region, s, t, samples, master)?;
    let lhs_median = super::stats::median(&lhs);
    let rhs_median = super::stats::median(&rhs);
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    let report = if constant(&lhs) && constant(&rhs) && lhs[0] == rhs[0] {
        DistTestReport {
            test: TestKind::Degenerate,
            statistic: 0.0,
            p_value: 1.0,
            sample_sizes: (lhs.len(), rhs.len()),
            ess: None,
            inconclusive: false,
        }
    } else {
        match test {
            TestKind::AndersonDarling => anderson_darling_two_sample(&lhs, &rhs)?,
            TestKind::KS2 => ks_two_sample(&lhs, &rhs)?,
            other => return Err(invalid(format!("{other:?} is not a two-sample test"))),
        }
    };
    Ok(StarReport {
        kind,
        form,
        t,
        s,
        samples_per_side: samples,
        lhs_median,
        rhs_median,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullUniformity {
    pub reruns: usize,
    pub threshold: f64,
    pub below: usize,
    pub p_values: Vec<f64>,
}

/// Repeat the `ε = 1` identity test with independent seeds and count p-values
/// below `threshold`.
pub fn null_uniformity(
    setup: &StarSetup,
    kind: StarKind,
    t: f64,
    samples: usize,
    reruns: usize,
    threshold: f64,
    master: u64,
) -> Result<NullUniformity> {
    let p_values = (0..reruns as u64)
        .map(|k| {
            star_equation_test(
                setup,
                kind,
                RhsForm::Exact,
                &Region::All,
                0.0,
                t,
                samples,
                TestKind::KS2,
                StreamKey::derive_master(master, 1000 + k),
            )
            .map(|r| r.report.p_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullUniformity {
        reruns,
        threshold,
        below: p_values.iter().filter(|&&p| p < threshold).count(),
        p_values,
    })
}
