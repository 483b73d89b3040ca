//! Atom scan: `n^d P(M(box of side L/n) > δ)` across resolutions.

use super::stats::wilson_interval;
use crate::error::{invalid, Result};
use crate::logspace::SignedLog;
use crate::measures::CellMeasure;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomPoint {
    pub n: usize,
    pub delta: f64,
    /// `n^d` times the fraction of boxes whose mass exceeds `delta`.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomCurve {
    pub points: Vec<AtomPoint>,
    /// Requested resolutions dropped because a box would hold fewer than 4 cells
    /// or the grid does not split evenly.
    pub truncated: Vec<usize>,
    pub replicas: usize,
}

/// Pool every box of every replica for the estimate. Boxes within a replica
/// are dependent, so the Wilson band uses the replica count as the number of
/// trials, which is conservative.
pub fn atom_scan(samples: &[CellMeasure<f64>], deltas: &[f64], ns: &[usize], z: f64) -> Result<AtomCurve> {
    let first = samples.first().ok_or_else(|| invalid("atom scan needs at least one sample"))?;
    let grid = *first.grid();
    if samples.iter().any(|m| *m.grid() != grid) {
        return Err(invalid("all samples must share one grid"));
    }
    let (cells, d) = (grid.cells_per_axis(), grid.dimension());
    let mut points = Vec::new();
    let mut truncated = Vec::new();
    for &n in ns {
        if n == 0 || !n.is_power_of_two() {
            return Err(invalid(format!("box resolution must be a power of two, got {n}")));
        }
        if cells % n != 0 || (cells / n).pow(d as u32) < 4 {
            truncated.push(n);
            continue;
        }
        let side = cells / n;
        let box_count = n.pow(d as u32);
        let masses: Vec<f64> = samples
            .iter()
            .flat_map(|m| {
                let mut buckets = vec![Vec::new(); box_count];
                for i in 0..m.len() {
                    let [cx, cy] = grid.cell_coords(i);
                    let b = if d == 1 { cx / side } else { (cy / side) * n + cx / side };
                    buckets[b].push(m.log_mass(i));
                }
                buckets.into_iter().map(|b| SignedLog::sum(b).value()).collect::<Vec<_>>()
            })
            .collect();
        let scale = box_count as f64;
        for &delta in deltas {
            let hits = masses.iter().filter(|&&m| m > delta).count();
            let p = hits as f64 / masses.len() as f64;
            let effective = samples.len();
            let (lo, hi) = wilson_interval((p * effective as f64).round() as usize, effective, z);
            points.push(AtomPoint {
                n,
                delta,
                value: scale * p,
                lower: scale * lo.min(p),
                upper: scale * hi.max(p),
            });
        }
    }
    Ok(AtomCurve {
        points,
        truncated,
        replicas: samples.len(),
    })
}

impl AtomCurve {
    /// Values for one `delta`, in the order the resolutions were requested.
    pub fn series(&self, delta: f64) -> Vec<&AtomPoint> {
        self.points.iter().filter(|p| p.delta == delta).collect()
    }

    /// Each value is no larger than the previous upper band.
    pub fn nonincreasing_within_bands(&self, delta: f64) -> bool {
        self.series(delta).windows(2).all(|w| w[1].lower <= w[0].upper)
    }
}
