//! Poisson–Dirichlet reference sampler and ranked-mass statistics of Gibbs measures.

use super::stats::{mean_se, MeanEstimate};
use crate::error::{invalid, Result};
use crate::measures::{CellMeasure, MeasureKind};
use crate::rng::{Purpose, StreamKey};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::Serialize;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// First `sticks` weights of a PD(α, 0) stick-breaking draw (size-biased order)
/// and the unbroken remainder.
pub fn pd_sticks<R: Rng + ?Sized>(alpha: f64, sticks: usize, rng: &mut R) -> Result<(Vec<f64>, f64)> {
    check_alpha(alpha)?;
    let mut rest = 1.0;
    let mut out = Vec::with_capacity(sticks);
    for k in 1..=sticks {
        let v = Beta::new(1.0 - alpha, k as f64 * alpha)
            .map_err(|e| invalid(e.to_string()))?
            .sample(rng);
        out.push(rest * v);
        rest *= 1.0 - v;
    }
    Ok((out, rest))
}

/// `Σ p_i²` of one draw; the tail after `sticks` pieces is replaced by its
/// conditional mean `r²(1 − α)/(1 + Kα)`, the PD(α, Kα) value scaled by `r²`.
pub fn pd_overlap<R: Rng + ?Sized>(alpha: f64, sticks: usize, rng: &mut R) -> Result<f64> {
    let (p, rest) = pd_sticks(alpha, sticks, rng)?;
    let tail = rest * rest * (1.0 - alpha) / (1.0 + sticks as f64 * alpha);
    Ok(p.iter().map(|x| x * x).sum::<f64>() + tail)
}

/// Monte Carlo estimate of `E[Σ p_i²]` under PD(α, 0); the exact value is `1 − α`.
pub fn pd_reference_overlap(alpha: f64, draws: usize, sticks: usize, master: u64) -> Result<MeanEstimate> {
    check_alpha(alpha)?;
    let xs = (0..draws as u64)
        .into_par_iter()
        .map(|r| pd_overlap(alpha, sticks, &mut StreamKey::new(master, r, 0, Purpose::Auxiliary(3)).rng()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_se(&xs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdReport {
    pub alpha: f64,
    /// `Σ_i m_i²` over replicas.
    pub overlap: MeanEstimate,
    /// `1 − α`.
    pub reference: f64,
    /// Mean of the `k`-th largest normalized mass.
    pub ranked_means: Vec<f64>,
    pub within_three_se: bool,
    /// Conjecture-level comparison; never gates.
    pub exploratory: bool,
}

/// Ranked normalized masses of Gibbs measures against PD(α, 0).
pub fn poisson_dirichlet_stats(gibbs: &[CellMeasure<f64>], alpha: f64, top: usize) -> Result<PdReport> {
    check_alpha(alpha)?;
    if gibbs.is_empty() {
        return Err(invalid("no Gibbs samples"));
    }
    if let Some(m) = gibbs.iter().find(|m| m.kind() != MeasureKind::Gibbs) {
        return Err(invalid(format!("expected Gibbs measures, got {}", m.kind())));
    }
    let mut sums = vec![0.0; top];
    let overlaps: Vec<f64> = gibbs
        .iter()
        .map(|m| {
            let mut masses: Vec<f64> = (0..m.len()).map(|i| m.mass(i)).collect();
            masses.sort_by(|a, b| b.total_cmp(a));
            for (s, v) in sums.iter_mut().zip(&masses) {
                *s += v;
            }
            masses.iter().map(|x| x * x).sum()
        })
        .collect();
    let overlap = mean_se(&overlaps);
    let reference = 1.0 - alpha;
    Ok(PdReport {
        alpha,
        reference,
        within_three_se: overlap.within(reference, 3.0),
        overlap,
        ranked_means: sums.iter().map(|s| s / gibbs.len() as f64).collect(),
        exploratory: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldRun, GridSpec};
    use crate::measures::{chaos_measure, gibbs_measure, Region};

    #[test]
    fn reference_sampler_reproduces_one_minus_alpha() {
        for (k, alpha) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            let est = pd_reference_overlap(alpha, 20_000, 200, 40 + k as u64).unwrap();
            assert!(est.within(1.0 - alpha, 3.0), "alpha={alpha} {est:?}");
        }
    }

    #[test]
    fn sticks_sum_to_one() {
        let mut rng = StreamKey::new(1, 0, 0, Purpose::Path).rng();
        let (p, rest) = pd_sticks(0.5, 50, &mut rng).unwrap();
        assert!((p.iter().sum::<f64>() + rest - 1.0).abs() < 1e-12);
        assert!(pd_sticks(1.0, 5, &mut rng).is_err());
    }

    #[test]
    fn concentrated_measure_has_unit_top_mass() {
        let grid = GridSpec::new(1, 16, 1.0).unwrap();
        let mut values = vec![0.0; 16];
        values[3] = 50.0;
        let run = FieldRun::from_values(grid, 1.0, values, 0, 0).unwrap();
        let g = gibbs_measure(&chaos_measure(&run, 40.0).unwrap(), &Region::All).unwrap();
        let r = poisson_dirichlet_stats(&[g], 0.05, 3).unwrap();
        assert!((r.ranked_means[0] - 1.0).abs() < 1e-12);
        assert!((r.overlap.mean - 1.0).abs() < 1e-12);
        assert!(r.exploratory);
    }
}
