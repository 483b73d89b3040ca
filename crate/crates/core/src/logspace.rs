//! Signed log-domain numbers.
//!
//! A value `m` is kept as `(ln|m|, sign)`; zero is `(-inf, 0)`.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog<T> {
    pub log_abs: T,
    pub sign: i8,
}

impl<T: Scalar> SignedLog<T> {
    pub fn zero() -> Self {
        SignedLog {
            log_abs: T::neg_infinity(),
            sign: 0,
        }
    }

    pub fn from_value(v: T) -> Self {
        if v == T::zero() {
            Self::zero()
        } else {
            SignedLog {
                log_abs: v.abs().ln(),
                sign: if v > T::zero() { 1 } else { -1 },
            }
        }
    }

    /// `prefactor * exp(log_weight)` without forming the exponential.
    pub fn from_parts(prefactor: T, log_weight: T) -> Self {
        if prefactor == T::zero() || log_weight == T::neg_infinity() {
            Self::zero()
        } else {
            SignedLog {
                log_abs: prefactor.abs().ln() + log_weight,
                sign: if prefactor > T::zero() { 1 } else { -1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            1 => self.log_abs.exp(),
            _ => -self.log_abs.exp(),
        }
    }

    pub fn mul_log(self, log_factor: T) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                log_abs: self.log_abs + log_factor,
                sign: self.sign,
            }
        }
    }

    pub fn neg(self) -> Self {
        SignedLog {
            log_abs: self.log_abs,
            sign: -self.sign,
        }
    }

    /// Signed sum of a collection of log-domain terms.
    pub fn sum<I: IntoIterator<Item = SignedLog<T>>>(terms: I) -> Self {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for s in terms {
            match s.sign {
                1 => pos.push(s.log_abs),
                -1 => neg.push(s.log_abs),
                _ => {}
            }
        }
        combine(log_sum_exp(&pos), log_sum_exp(&neg))
    }
}

/// `ln(e^lp - e^ln)` with the sign of the difference.
fn combine<T: Scalar>(lp: T, ln: T) -> SignedLog<T> {
    if lp == ln {
        return SignedLog::zero();
    }
    let (hi, lo, sign) = if lp > ln { (lp, ln, 1) } else { (ln, lp, -1) };
    if lo == T::neg_infinity() {
        return SignedLog { log_abs: hi, sign };
    }
    SignedLog {
        log_abs: hi + (-(lo - hi).exp()).ln_1p(),
        sign,
    }
}

/// `ln Σ e^{x_i}`; `-inf` for an empty slice.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() || m.is_infinite() {
        return m;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_round_trip() {
        let z = SignedLog::<f64>::from_value(0.0);
        assert_eq!(z.sign, 0);
        assert_eq!(z.value(), 0.0);
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let a = SignedLog::<f64>::from_parts(2.0, 700.0);
        let b = SignedLog::<f64>::from_parts(-1.0, 700.0);
        let s = SignedLog::sum([a, b]);
        assert_eq!(s.sign, 1);
        assert!((s.log_abs - 700.0).abs() < 1e-12);
    }

    #[test]
    fn exact_cancellation_is_zero() {
        let a = SignedLog::<f64>::from_parts(3.0, -5.0);
        assert!(SignedLog::sum([a, a.neg()]).is_zero());
    }

    proptest! {
        #[test]
        fn sum_matches_direct(xs in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let direct: f64 = xs.iter().sum();
            let s = SignedLog::sum(xs.iter().map(|&x| SignedLog::from_value(x)));
            let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
            prop_assert!((s.value() - direct).abs() <= 1e-10 * scale.max(1.0) * xs.len() as f64);
        }

        #[test]
        fn lse_bounds(xs in prop::collection::vec(-600f64..600.0, 1..30)) {
            let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let l = log_sum_exp(&xs);
            prop_assert!(l >= m - 1e-12);
            prop_assert!(l <= m + (xs.len() as f64).ln() + 1e-12);
        }
    }
}
