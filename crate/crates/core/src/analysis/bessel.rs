//! Transition law of the three-dimensional Bessel process.

use statrs::function::erf::erfc;
use std::f64::consts::PI;

fn normal_cdf(x: f64, var: f64) -> f64 {
    0.5 * erfc(-x / (2.0 * var).sqrt())
}

fn normal_pdf(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Density at `r > 0` of a Bessel(3) process at time `s` started from `beta > 0`:
/// `(r/β)(φ_s(r − β) − φ_s(r + β))`.
pub fn bessel3_density(r: f64, beta: f64, s: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    r / beta * (normal_pdf(r - beta, s) - normal_pdf(r + beta, s))
}

/// Distribution function of the same law; a unit step at `beta` when `s = 0`.
pub fn bessel3_cdf(r: f64, beta: f64, s: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if s <= 0.0 {
        return if r >= beta { 1.0 } else { 0.0 };
    }
    let gaussian_part = normal_cdf(r - beta, s) - normal_cdf(-beta, s) + normal_cdf(r + beta, s) - normal_cdf(beta, s);
    let f = (s * (normal_pdf(r + beta, s) - normal_pdf(r - beta, s)) + beta * gaussian_part) / beta;
    f.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::adaptive_simpson;
    use proptest::prelude::*;

    #[test]
    fn cdf_matches_integrated_density() {
        for &(beta, s) in &[(1.0, 0.5), (2.0, 4.0), (0.3, 10.0), (5.0, 1.0)] {
            for &r in &[0.1, 0.7, 1.5, 3.0, 8.0] {
                let q = adaptive_simpson(&|y| bessel3_density(y, beta, s), 0.0, r, 1e-13, 50).unwrap();
                assert!((q - bessel3_cdf(r, beta, s)).abs() < 1e-9, "beta={beta} s={s} r={r}");
            }
        }
    }

    #[test]
    fn point_mass_at_time_zero() {
        assert_eq!(bessel3_cdf(1.999, 2.0, 0.0), 0.0);
        assert_eq!(bessel3_cdf(2.0, 2.0, 0.0), 1.0);
    }

    #[test]
    fn mean_of_inverse_is_known() {
        // E[1/R_s] = (2Φ(β/√s) − 1)/β for Bessel(3) from β.
        let (beta, s) = (1.5, 2.0);
        let m = adaptive_simpson(&|y| bessel3_density(y, beta, s) / y, 1e-12, 12.0, 1e-12, 50).unwrap();
        let exact = (2.0 * normal_cdf(beta, s) - 1.0) / beta;
        assert!((m - exact).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(beta in 0.1f64..5.0, s in 0.01f64..20.0, a in 0.0f64..20.0, b in 0.0f64..20.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(bessel3_cdf(lo, beta, s) <= bessel3_cdf(hi, beta, s) + 1e-15);
            prop_assert!(bessel3_cdf(1e6, beta, s) > 1.0 - 1e-12);
        }
    }
}
