//! Sample covariances across replicas with jackknife standard errors.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub pair: (usize, usize),
    pub estimate: f64,
    /// Delete-one jackknife standard error; infinite with fewer than 3 replicas.
    pub std_err: f64,
}

/// Unbiased covariance of cells `(a, b)` over replicas (`samples[r][cell]`).
pub fn empirical_covariance<T: Scalar>(
    samples: &[Vec<T>],
    pairs: &[(usize, usize)],
) -> Result<Vec<CovarianceEstimate>> {
    let r = samples.len();
    if r < 2 {
        return Err(invalid(format!("covariance needs at least 2 replicas, got {r}")));
    }
    pairs
        .iter()
        .map(|&(a, b)| {
            let width = samples[0].len();
            if a >= width || b >= width {
                return Err(invalid(format!("cell pair ({a}, {b}) outside {width} cells")));
            }
            // Shift by the first replica so identical replicas give exactly zero.
            let (a0, b0) = (samples[0][a].to_f64_lossy(), samples[0][b].to_f64_lossy());
            let xs: Vec<f64> = samples.iter().map(|s| s[a].to_f64_lossy() - a0).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s[b].to_f64_lossy() - b0).collect();
            let n = r as f64;
            let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let estimate = (sxy - sx * sy / n) / (n - 1.0);
            let std_err = if r < 3 {
                f64::INFINITY
            } else {
                let loo: Vec<f64> = xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| {
                        let (px, py) = (sx - x, sy - y);
                        (sxy - x * y - px * py / (n - 1.0)) / (n - 2.0)
                    })
                    .collect();
                let mean = loo.iter().sum::<f64>() / n;
                ((n - 1.0) / n * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
            };
            Ok(CovarianceEstimate {
                pair: (a, b),
                estimate,
                std_err,
            })
        })
        .collect()
}
