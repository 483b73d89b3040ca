//! Box-moment scaling exponents `ξ(q)` from dyadic box masses.

use super::stats::{group_jackknife, ols_slope};
use crate::error::{invalid, Result};
use crate::logspace::{log_sum_exp, SignedLog};
use crate::measures::{CellMeasure, MeasureKind};
use serde::Serialize;

/// Smallest number of cells in a box that enters the regression.
pub const MIN_CELLS_PER_BOX: usize = 4;
pub const MIN_SCALES: usize = 4;
pub const MAX_JACKKNIFE_GROUPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub q_values: Vec<f64>,
    pub xi_hat: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Box side lengths used in the regression, largest first.
    pub scales_used: Vec<f64>,
    /// One entry per `q` outside the moment-existence range, or other caveats.
    pub warnings: Vec<String>,
    /// Discrete second differences of `ξ̂` stay below two standard errors.
    pub concave: bool,
}

/// `(d + γ²/2) q − (γ²/2) q²`.
pub fn lognormal_spectrum(q: f64, gamma: f64, d: usize) -> f64 {
    (d as f64 + 0.5 * gamma * gamma) * q - 0.5 * gamma * gamma * q * q
}

/// Dyadic levels `j ≥ 1` whose boxes hold at least [`MIN_CELLS_PER_BOX`] cells.
pub fn dyadic_levels(cells_per_axis: usize, d: usize) -> Vec<u32> {
    (1..)
        .take_while(|&j: &u32| {
            let boxes = 1usize << j;
            boxes <= cells_per_axis
                && cells_per_axis % boxes == 0
                && (cells_per_axis / boxes).pow(d as u32) >= MIN_CELLS_PER_BOX
        })
        .collect()
}

/// Signed box masses at level `j` (boxes of side `L/2^j`), in log form.
pub fn box_masses(m: &CellMeasure<f64>, j: u32) -> Vec<SignedLog<f64>> {
    let grid = m.grid();
    let (n, d) = (grid.cells_per_axis(), grid.dimension());
    let per_axis = 1usize << j;
    let side = n / per_axis;
    let mut buckets: Vec<Vec<SignedLog<f64>>> = vec![Vec::new(); per_axis.pow(d as u32)];
    for i in 0..m.len() {
        let [cx, cy] = grid.cell_coords(i);
        let b = if d == 1 { cx / side } else { (cy / side) * per_axis + cx / side };
        buckets[b].push(m.log_mass(i));
    }
    buckets.into_iter().map(SignedLog::sum).collect()
}

/// Per-`q` regression of `ln Ê[M(box)^q]` on `ln(box side)`; the slope is `ξ̂(q)`.
///
/// Signed measures use `|M(box)|`, which is flagged. Standard errors come from
/// a delete-one-group jackknife over contiguous replica groups.
pub fn estimate_spectrum(samples: &[CellMeasure<f64>], q_values: &[f64]) -> Result<SpectrumEstimate> {
    let first = samples.first().ok_or_else(|| invalid("spectrum needs at least one sample"))?;
    let grid = *first.grid();
    if samples.iter().any(|m| *m.grid() != grid) {
        return Err(invalid("all samples must share one grid"));
    }
    let d = grid.dimension();
    let levels = dyadic_levels(grid.cells_per_axis(), d);
    if levels.len() < MIN_SCALES {
        return Err(invalid(format!(
            "{} cells per axis give {} dyadic scales, need at least {MIN_SCALES}",
            grid.cells_per_axis(),
            levels.len()
        )));
    }
    let mut warnings = Vec::new();
    let kind = first.kind();
    let gamma = first.gamma();
    if kind == MeasureKind::Subcritical && gamma > 0.0 {
        let bound = 2.0 * d as f64 / (gamma * gamma);
        for &q in q_values.iter().filter(|&&q| q >= bound) {
            warnings.push(format!("q = {q} is outside the moment range q < 2d/γ² = {bound:.4}"));
        }
    }
    if kind.is_signed() {
        warnings.push("signed measure: moments of |M(box)|".into());
    }

    // log Σ_boxes |M|^q per (q, level, replica), plus box counts.
    let boxes: Vec<Vec<Vec<f64>>> = samples
        .iter()
        .map(|m| {
            levels
                .iter()
                .map(|&j| box_masses(m, j).into_iter().map(|b| if b.is_zero() { f64::NEG_INFINITY } else { b.log_abs }).collect())
                .collect()
        })
        .collect();
    let log_side: Vec<f64> = levels.iter().map(|&j| (grid.extent() / (1u64 << j) as f64).ln()).collect();
    let replicas = samples.len();
    let groups = replicas.min(MAX_JACKKNIFE_GROUPS);
    let group_of = |r: usize| r * groups / replicas;

    let mut xi_hat = Vec::with_capacity(q_values.len());
    let mut std_err = Vec::with_capacity(q_values.len());
    for &q in q_values {
        if q == 0.0 {
            xi_hat.push(0.0);
            std_err.push(0.0);
            continue;
        }
        // per level, per replica: log Σ_b |M_b|^q
        let sums: Vec<Vec<f64>> = (0..levels.len())
            .map(|l| {
                boxes
                    .iter()
                    .map(|rep| {
                        let terms: Vec<f64> = rep[l].iter().map(|&a| q * a).collect();
                        log_sum_exp(&terms)
                    })
                    .collect()
            })
            .collect();
        let estimate = |skip: Option<usize>| {
            let ys: Vec<f64> = sums
                .iter()
                .enumerate()
                .map(|(l, per_rep)| {
                    let kept: Vec<f64> = per_rep
                        .iter()
                        .enumerate()
                        .filter(|(r, _)| Some(group_of(*r)) != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    let count = kept.len() as f64 * (1u64 << (levels[l] as usize * d)) as f64;
                    log_sum_exp(&kept) - count.ln()
                })
                .collect();
            ols_slope(&log_side, &ys)
        };
        let (full, se) = if groups >= 2 {
            group_jackknife(groups, estimate)
        } else {
            (estimate(None), f64::INFINITY)
        };
        xi_hat.push(full);
        std_err.push(se);
    }
    let concave = is_concave(q_values, &xi_hat, &std_err);
    Ok(SpectrumEstimate {
        q_values: q_values.to_vec(),
        xi_hat,
        std_err,
        scales_used: log_side.iter().map(|l| l.exp()).collect(),
        warnings,
        concave,
    })
}

/// Divided second differences on the sorted `q` grid are at most two standard errors above zero.
fn is_concave(q: &[f64], xi: &[f64], se: &[f64]) -> bool {
    let mut idx: Vec<usize> = (0..q.len()).collect();
    idx.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
    idx.windows(3).all(|w| {
        let (a, b, c) = (w[0], w[1], w[2]);
        let (h1, h2) = (q[b] - q[a], q[c] - q[b]);
        if h1 <= 0.0 || h2 <= 0.0 {
            return true;
        }
        // Second difference scaled to unit spacing of the wider step.
        let scale = 2.0 / (h1 + h2);
        let second = scale * ((xi[c] - xi[b]) / h2 - (xi[b] - xi[a]) / h1);
        let noise = scale * ((se[c] / h2).powi(2) + (se[b] * (1.0 / h1 + 1.0 / h2)).powi(2) + (se[a] / h1).powi(2)).sqrt();
        second <= 2.0 * noise + 1e-12
    })
}
