//! Two-sample and weighted one-sample distribution tests.

use crate::error::{invalid, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestKind {
    KS2,
    WeightedKS,
    AndersonDarling,
    /// Both samples are the same constant; reported as an exact match.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistTestReport {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub sample_sizes: (usize, usize),
    /// Effective sample size of a weighted test.
    pub ess: Option<f64>,
    /// Set when the effective sample size is too small for a verdict.
    pub inconclusive: bool,
}

/// Largest gap between the empirical CDFs of two samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// `P(D_{m,n} ≥ d)` by the exact lattice-path recursion (no ties).
pub fn ks_exact_p(d: f64, m: usize, n: usize) -> f64 {
    let (m, n) = if m > n { (n, m) } else { (m, n) };
    let (md, nd) = (m as f64, n as f64);
    let q = (0.5 + (d * md * nd - 1e-7).floor()) / (md * nd);
    let mut u: Vec<f64> = (0..=n).map(|j| if j as f64 / nd > q { 0.0 } else { 1.0 }).collect();
    for i in 1..=m {
        let w = i as f64 / (i + n) as f64;
        u[0] = if i as f64 / md > q { 0.0 } else { w * u[0] };
        for j in 1..=n {
            u[j] = if (i as f64 / md - j as f64 / nd).abs() > q {
                0.0
            } else {
                w * u[j] + u[j - 1]
            };
        }
    }
    (1.0 - u[n]).clamp(0.0, 1.0)
}

/// Kolmogorov distribution tail `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form of the CDF converges fast for small λ.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| ((2 * k - 1) as f64).powi(2) * c).map(f64::exp).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Two-sample KS test; exact p-value when `m·n ≤ 10^8`, asymptotic otherwise.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<DistTestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("KS test needs nonempty samples"));
    }
    let d = ks_statistic(a, b);
    let (m, n) = (a.len(), b.len());
    let p = if (m as f64) * (n as f64) <= 1e8 {
        ks_exact_p(d, m, n)
    } else {
        let en = (m as f64 * n as f64 / (m + n) as f64).sqrt();
        kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    };
    Ok(DistTestReport {
        test: TestKind::KS2,
        statistic: d,
        p_value: p,
        sample_sizes: (m, n),
        ess: None,
        inconclusive: false,
    })
}

/// Weighted one-sample KS against `cdf`. Weights need not be normalized; the
/// asymptotic null uses the effective sample size `(Σw)² / Σw²`.
pub fn weighted_ks(samples: &[f64], weights: &[f64], cdf: impl Fn(f64) -> f64, min_ess: f64) -> Result<DistTestReport> {
    if samples.len() != weights.len() {
        return Err(invalid("samples and weights differ in length"));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(invalid("weights must be finite and nonnegative"));
    }
    let mut pairs: Vec<(f64, f64)> = samples
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, &w)| (x, w))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let ess = if total > 0.0 { total * total / sq } else { 0.0 };
    let mut d = 0.0f64;
    let mut acc = 0.0;
    let mut k = 0;
    while k < pairs.len() {
        let x = pairs[k].0;
        let before = acc / total;
        while k < pairs.len() && pairs[k].0 == x {
            acc += pairs[k].1;
            k += 1;
        }
        let f = cdf(x);
        d = d.max((f - before).abs()).max((acc / total - f).abs());
    }
    let en = ess.sqrt();
    let p = if ess > 0.0 {
        kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    } else {
        f64::NAN
    };
    Ok(DistTestReport {
        test: TestKind::WeightedKS,
        statistic: d,
        p_value: p,
        sample_sizes: (samples.len(), 0),
        ess: Some(ess),
        inconclusive: !(ess >= min_ess),
    })
}

/// Two-sample Anderson–Darling (Scholz–Stephens midrank form) with the
/// interpolated tail probability.
pub fn anderson_darling_two_sample(a: &[f64], b: &[f64]) -> Result<DistTestReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(invalid("Anderson–Darling needs at least 2 points per sample"));
    }
    let samples = [a, b];
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let n_total = pooled.len() as f64;
    let mut distinct = pooled.clone();
    distinct.dedup();
    let lower = |s: &[f64], z: f64| s.partition_point(|&v| v < z) as f64;
    let upper = |s: &[f64], z: f64| s.partition_point(|&v| v <= z) as f64;
    let mut a2 = 0.0;
    for s in samples {
        let mut sorted = s.to_vec();
        sorted.sort_by(f64::total_cmp);
        let ni = sorted.len() as f64;
        let mut inner = 0.0;
        for &z in &distinct {
            let lj = upper(&pooled, z) - lower(&pooled, z);
            let bj = lower(&pooled, z) + lj / 2.0;
            let fij = upper(&sorted, z) - lower(&sorted, z);
            let mij = upper(&sorted, z) - fij / 2.0;
            inner += lj / n_total * (n_total * mij - bj * ni).powi(2) / (bj * (n_total - bj) - n_total * lj / 4.0);
        }
        a2 += inner / ni;
    }
    a2 *= (n_total - 1.0) / n_total;

    let k = 2.0;
    let nn = n_total;
    let h_inv: f64 = samples.iter().map(|s| 1.0 / s.len() as f64).sum();
    let hs: Vec<f64> = {
        let mut acc = 0.0;
        (2..pooled.len()).rev().map(|i| {
            acc += 1.0 / i as f64;
            acc
        }).collect()
    };
    let h = hs.last().copied().unwrap_or(0.0) + 1.0;
    let g: f64 = hs.iter().enumerate().map(|(i, v)| v / (i + 2) as f64).sum();
    let ca = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * h_inv;
    let cb = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * h_inv - 8.0 * h + 4.0 * g - 6.0;
    let cc = (6.0 * h + 2.0 * g - 2.0) * k * k + (4.0 * h - 4.0 * g + 6.0) * k + (2.0 * h - 6.0) * h_inv + 4.0 * h;
    let cd = (2.0 * h + 6.0) * k * k - 4.0 * h * k;
    let sigma2 = (ca * nn.powi(3) + cb * nn * nn + cc * nn + cd) / ((nn - 1.0) * (nn - 2.0) * (nn - 3.0));
    let m = k - 1.0;
    let stat = (a2 - m) / sigma2.sqrt();
    let b0 = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
    let b1 = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
    let b2 = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];
    let sig = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
    let crit: Vec<f64> = (0..7).map(|i| b0[i] + b1[i] / m.sqrt() + b2[i] / m).collect();
    let logs: Vec<f64> = sig.iter().map(|s: &f64| s.ln()).collect();
    let coef = quadratic_fit(&crit, &logs);
    let p = (coef[0] * stat * stat + coef[1] * stat + coef[2]).exp().clamp(0.0, 1.0);
    Ok(DistTestReport {
        test: TestKind::AndersonDarling,
        statistic: stat,
        p_value: p,
        sample_sizes: (a.len(), b.len()),
        ess: None,
        inconclusive: false,
    })
}

/// Least-squares `[a, b, c]` for `y ≈ a x² + b x + c`.
fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut m = [[0.0f64; 4]; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let basis = [xi * xi, xi, 1.0];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            m[r][3] += basis[r] * yi;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}
