//! Empirical moments of total masses across depths.

use super::stats::{mean_se, MeanEstimate};
use crate::error::{invalid, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub q: f64,
    pub estimate: MeanEstimate,
    /// Fraction of replicas with positive total; only those enter the estimate.
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub rows: Vec<MomentRow>,
    /// For each negative `q`: ratios of successive-`t` estimates.
    pub negative_ratios: Vec<(f64, Vec<f64>)>,
    /// For `q = 1`: `Δ ln(mean)/Δt` between successive depths.
    pub first_moment_growth: Vec<f64>,
    /// Some depth had no positive totals.
    pub inconclusive: bool,
}

impl MomentTable {
    pub fn row(&self, t: f64, q: f64) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.t == t && r.q == q)
    }
}

/// `Ê[M^q]` over the positive totals at each depth.
pub fn moment_scan(totals_by_t: &[(f64, Vec<f64>)], q_values: &[f64]) -> Result<MomentTable> {
    if totals_by_t.is_empty() {
        return Err(invalid("moment scan needs at least one depth"));
    }
    let mut rows = Vec::new();
    let mut inconclusive = false;
    for (t, totals) in totals_by_t {
        let positive: Vec<f64> = totals.iter().copied().filter(|&m| m > 0.0).collect();
        let positive_fraction = positive.len() as f64 / totals.len().max(1) as f64;
        inconclusive |= positive.is_empty();
        for &q in q_values {
            let estimate = if q == 0.0 {
                MeanEstimate {
                    mean: 1.0,
                    std_err: 0.0,
                    replicas: positive.len(),
                }
            } else {
                mean_se(&positive.iter().map(|m| m.powf(q)).collect::<Vec<_>>())
            };
            rows.push(MomentRow {
                t: *t,
                q,
                estimate,
                positive_fraction,
            });
        }
    }
    let series = |q: f64| -> Vec<f64> {
        totals_by_t
            .iter()
            .map(|(t, _)| rows.iter().find(|r| r.t == *t && r.q == q).unwrap().estimate.mean)
            .collect()
    };
    let negative_ratios = q_values
        .iter()
        .filter(|&&q| q < 0.0)
        .map(|&q| (q, series(q).windows(2).map(|w| w[1] / w[0]).collect()))
        .collect();
    let first_moment_growth = if q_values.contains(&1.0) {
        let s = series(1.0);
        s.windows(2)
            .zip(totals_by_t.windows(2))
            .map(|(m, t)| (m[1].ln() - m[0].ln()) / (t[1].0 - t[0].0))
            .collect()
    } else {
        Vec::new()
    };
    Ok(MomentTable {
        rows,
        negative_ratios,
        first_moment_growth,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroth_moment_is_one() {
        let t = moment_scan(&[(1.0, vec![0.5, 2.0, -1.0])], &[0.0, -1.0]).unwrap();
        assert_eq!(t.row(1.0, 0.0).unwrap().estimate.mean, 1.0);
        let r = t.row(1.0, -1.0).unwrap();
        assert!((r.estimate.mean - 1.25).abs() < 1e-15);
        assert!((r.positive_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ratios_and_growth() {
        let t = moment_scan(&[(1.0, vec![1.0, 1.0]), (2.0, vec![2.0, 2.0])], &[-1.0, 1.0]).unwrap();
        assert_eq!(t.negative_ratios, vec![(-1.0, vec![0.5])]);
        assert!((t.first_moment_growth[0] - 2f64.ln()).abs() < 1e-15);
        assert!(!t.inconclusive);
    }

    #[test]
    fn all_negative_is_inconclusive() {
        let t = moment_scan(&[(1.0, vec![-1.0, -2.0])], &[0.0]).unwrap();
        assert!(t.inconclusive);
    }
}
