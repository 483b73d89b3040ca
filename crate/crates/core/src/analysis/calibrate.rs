//! Calibration of `λ` so that `E[exp(−λ M(C))] = 1/2`.

use super::stats::{mean_se, MeanEstimate};
use crate::error::{invalid, Error, Result};
use serde::Serialize;

pub const BRACKET: (f64, f64) = (1e-8, 1e8);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub gamma_n: f64,
    pub lambda_n: f64,
    pub phi_target: f64,
    /// `φ̂(λ_n)` on the calibration sample.
    pub phi_hat: f64,
    pub bracket: (f64, f64),
    /// Standard error of `φ̂(λ_n)`.
    pub mc_error: f64,
    pub samples: usize,
}

/// `φ̂(λ) = mean of exp(−λ M_i)`; exactly 1 at `λ = 0`.
pub fn laplace_estimate(masses: &[f64], lambda: f64) -> MeanEstimate {
    if lambda == 0.0 {
        return MeanEstimate {
            mean: 1.0,
            std_err: 0.0,
            replicas: masses.len(),
        };
    }
    let v: Vec<f64> = masses.iter().map(|m| (-lambda * m).exp()).collect();
    mean_se(&v)
}

/// Bisection in `ln λ` on a fixed sample of masses. The same masses are used
/// for every `λ`, so `φ̂` is monotone and the root is deterministic.
pub fn calibrate_lambda(gamma_n: f64, masses: &[f64], target: f64) -> Result<CalibrationResult> {
    if masses.is_empty() {
        return Err(invalid("calibration needs at least one mass sample"));
    }
    if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
        return Err(invalid("masses must be finite and nonnegative"));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid(format!("target must lie in (0, 1), got {target}")));
    }
    let phi = |l: f64| laplace_estimate(masses, l).mean;
    let (lo0, hi0) = BRACKET;
    if !(phi(lo0) > target && phi(hi0) < target) {
        return Err(Error::BracketNotFound { lo: lo0, hi: hi0 });
    }
    let (mut lo, mut hi) = (lo0.ln(), hi0.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let lambda_n = (0.5 * (lo + hi)).exp();
    let est = laplace_estimate(masses, lambda_n);
    Ok(CalibrationResult {
        gamma_n,
        lambda_n,
        phi_target: target,
        phi_hat: est.mean,
        bracket: BRACKET,
        mc_error: est.std_err,
        samples: masses.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deterministic_mass_gives_ln_two() {
        let r = calibrate_lambda(0.0, &[1.0; 10], 0.5).unwrap();
        assert!((r.lambda_n - std::f64::consts::LN_2).abs() < 1e-9);
        assert!(r.mc_error < 1e-15);
        assert_eq!(laplace_estimate(&[3.0, 7.0], 0.0).mean, 1.0);
    }

    #[test]
    fn bracket_failure() {
        assert!(matches!(calibrate_lambda(0.0, &[0.0; 5], 0.5), Err(Error::BracketNotFound { .. })));
        assert!(matches!(calibrate_lambda(0.0, &[1e12; 5], 0.5), Err(Error::BracketNotFound { .. })));
    }

    proptest! {
        #[test]
        fn root_solves_the_equation(masses in proptest::collection::vec(0.01f64..100.0, 1..30)) {
            let r = calibrate_lambda(1.0, &masses, 0.5).unwrap();
            prop_assert!((r.phi_hat - 0.5).abs() < 1e-9);
            let again = calibrate_lambda(1.0, &masses, 0.5).unwrap();
            prop_assert_eq!(r, again);
        }

        #[test]
        fn scaling_masses_scales_lambda(masses in proptest::collection::vec(0.1f64..10.0, 1..20), c in 0.1f64..10.0) {
            let a = calibrate_lambda(1.0, &masses, 0.5).unwrap().lambda_n;
            let scaled: Vec<f64> = masses.iter().map(|m| m * c).collect();
            let b = calibrate_lambda(1.0, &scaled, 0.5).unwrap().lambda_n;
            prop_assert!((a / b / c - 1.0).abs() < 1e-8);
        }
    }
}
