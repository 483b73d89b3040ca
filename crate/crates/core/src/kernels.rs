//! Seed kernels `k` and the star-scale covariance
//! `K_t(x) = ∫_1^{e^t} k(u x) / u du`.
//!
//! Both shipped families are radial polynomials `p(|x|/R)` on the unit ball,
//! so `K_t` has a closed form through the antiderivative of `p(v)/v`. An
//! adaptive Simpson rule in `v = ln u` is kept as an independent route.

use crate::error::{invalid, Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `(1 - |x|/R)_+`, positive-definite in one dimension.
    Triangle1D,
    /// Wendland's `(1 - r)_+^4 (4r + 1)`, positive-definite up to three dimensions.
    CompactSpline,
}

impl KernelFamily {
    /// Coefficients of the radial profile `p(v) = Σ c_k v^k` on `[0, 1]`.
    fn profile(self) -> &'static [f64] {
        match self {
            KernelFamily::Triangle1D => &[1.0, -1.0],
            KernelFamily::CompactSpline => &[1.0, 0.0, -10.0, 20.0, -15.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedKernel {
    family: KernelFamily,
    support_radius: f64,
    dimension: usize,
    /// Non-fatal findings from load-time validation.
    warnings: Vec<String>,
}

/// Points per axis for the load-time Fourier positivity check.
const PD_GRID: usize = 1024;

impl SeedKernel {
    pub fn new(family: KernelFamily, dimension: usize, support_radius: f64) -> Result<Self> {
        if !(support_radius.is_finite() && support_radius > 0.0) {
            return Err(invalid(format!(
                "support_radius must be positive, got {support_radius}"
            )));
        }
        match (family, dimension) {
            (KernelFamily::Triangle1D, 1) | (KernelFamily::CompactSpline, 1 | 2) => {}
            (KernelFamily::Triangle1D, d) => {
                return Err(invalid(format!(
                    "Triangle1D is only positive-definite in dimension 1, got {d}"
                )))
            }
            (KernelFamily::CompactSpline, d) => {
                return Err(invalid(format!(
                    "CompactSpline supports dimensions 1 and 2, got {d}"
                )))
            }
        }
        let mut kernel = SeedKernel {
            family,
            support_radius,
            dimension,
            warnings: Vec::new(),
        };
        let min_ratio = kernel.fourier_min_ratio();
        if min_ratio < -1e-8 {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: min_ratio,
                index: 0,
                largest: 1.0,
            });
        }
        if !kernel.radially_nonincreasing() {
            kernel
                .warnings
                .push("x·∇k(x) ≤ 0 fails on the radial grid".to_string());
        }
        Ok(kernel)
    }

    pub fn triangle(support_radius: f64) -> Result<Self> {
        Self::new(KernelFamily::Triangle1D, 1, support_radius)
    }

    pub fn spline(dimension: usize, support_radius: f64) -> Result<Self> {
        Self::new(KernelFamily::CompactSpline, dimension, support_radius)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `k(x)` for a point of the kernel's dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radial(norm(x))
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        let v = r.abs() / self.support_radius;
        if v >= 1.0 {
            return 0.0;
        }
        horner(self.family.profile(), v)
    }

    /// Smallest DFT coefficient of the sampled kernel relative to the largest.
    fn fourier_min_ratio(&self) -> f64 {
        let period = 4.0 * self.support_radius;
        let step = period / PD_GRID as f64;
        let coord = |j: usize| {
            let j = if j > PD_GRID / 2 { j as f64 - PD_GRID as f64 } else { j as f64 };
            j * step
        };
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(PD_GRID);
        let spectrum: Vec<f64> = match self.dimension {
            1 => {
                let mut buf: Vec<Complex<f64>> = (0..PD_GRID)
                    .map(|j| Complex::new(self.eval_radial(coord(j)), 0.0))
                    .collect();
                fft.process(&mut buf);
                buf.iter().map(|c| c.re).collect()
            }
            _ => {
                let mut buf: Vec<Complex<f64>> = (0..PD_GRID * PD_GRID)
                    .map(|idx| {
                        let (a, b) = (coord(idx / PD_GRID), coord(idx % PD_GRID));
                        Complex::new(self.eval_radial(a.hypot(b)), 0.0)
                    })
                    .collect();
                crate::field::circulant::fft2_in_place(&mut buf, PD_GRID, fft.as_ref());
                buf.iter().map(|c| c.re).collect()
            }
        };
        let max = spectrum.iter().copied().fold(f64::MIN, f64::max);
        let min = spectrum.iter().copied().fold(f64::MAX, f64::min);
        min / max
    }

    fn radially_nonincreasing(&self) -> bool {
        let steps = 4096;
        let mut prev = self.eval_radial(0.0);
        for i in 1..=steps {
            let k = self.eval_radial(self.support_radius * i as f64 / steps as f64);
            if k > prev + 1e-15 {
                return false;
            }
            prev = k;
        }
        true
    }
}

/// The covariance family `K_t` generated by a seed kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarCovariance {
    seed: SeedKernel,
    closed_form_available: bool,
}

impl StarCovariance {
    pub fn new(seed: SeedKernel) -> Self {
        StarCovariance {
            seed,
            closed_form_available: true,
        }
    }

    /// Force evaluation through quadrature even when a closed form exists.
    pub fn quadrature_only(seed: SeedKernel) -> Self {
        StarCovariance {
            seed,
            closed_form_available: false,
        }
    }

    pub fn seed(&self) -> &SeedKernel {
        &self.seed
    }

    pub fn closed_form_available(&self) -> bool {
        self.closed_form_available
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.eval_radial(t, norm(x))
    }

    pub fn eval_radial(&self, t: f64, r: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("t must be nonnegative, got {t}")));
        }
        if self.closed_form_available {
            Ok(self.closed_form(t, r))
        } else {
            self.quadrature(t, r)
        }
    }

    /// `K_t(x) - K_s(x)`, the covariance of the increment over `[s, t]`.
    pub fn band(&self, s: f64, t: f64, x: &[f64]) -> Result<f64> {
        self.band_radial(s, t, norm(x))
    }

    /// Uses `K_t(x) - K_s(x) = K_{t-s}(e^s x)` so that narrow bands keep full precision.
    pub fn band_radial(&self, s: f64, t: f64, r: f64) -> Result<f64> {
        if !(s >= 0.0) || s > t {
            return Err(invalid(format!("band requires 0 <= s <= t, got s={s}, t={t}")));
        }
        self.eval_radial(t - s, r.abs() * s.exp())
    }

    pub fn closed_form(&self, t: f64, r: f64) -> f64 {
        let rho = r.abs() / self.seed.support_radius;
        if rho >= 1.0 || t == 0.0 {
            return 0.0;
        }
        let coeffs = self.seed.family.profile();
        if rho == 0.0 {
            return t * coeffs[0];
        }
        // ∫_ρ^b p(v)/v dv with b = min(ρ e^t, 1).
        let log_ratio = t.min(-rho.ln());
        let b = if log_ratio < t { 1.0 } else { (rho * t.exp()).min(1.0) };
        let mut poly = 0.0;
        let (mut ak, mut bk) = (1.0, 1.0);
        for (k, c) in coeffs.iter().enumerate().skip(1) {
            ak *= rho;
            bk *= b;
            poly += c * (bk - ak) / k as f64;
        }
        coeffs[0] * log_ratio + poly
    }

    /// Adaptive Simpson in `v = ln u` with absolute tolerance `1e-10`.
    pub fn quadrature(&self, t: f64, r: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("t must be nonnegative, got {t}")));
        }
        let r = r.abs();
        let upper = if r == 0.0 {
            t
        } else {
            t.min((self.seed.support_radius / r).ln().max(0.0))
        };
        if upper <= 0.0 {
            return Ok(0.0);
        }
        let f = |v: f64| self.seed.eval_radial(v.exp() * r);
        adaptive_simpson(&f, 0.0, upper, 1e-10, 60).ok_or(Error::QuadratureFailure { t, r })
    }
}

fn horner(coeffs: &[f64], v: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Adaptive Simpson quadrature; `None` when the recursion depth is exhausted.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Option<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tri() -> StarCovariance {
        StarCovariance::new(SeedKernel::triangle(1.0).unwrap())
    }

    #[test]
    fn triangle_values() {
        let k = SeedKernel::triangle(1.0).unwrap();
        assert_eq!(k.eval(&[0.0]), 1.0);
        assert_eq!(k.eval(&[1.5]), 0.0);
        assert_eq!(k.eval(&[0.25]), 0.75);
        assert_eq!(k.eval(&[-0.25]), 0.75);
    }

    #[test]
    fn spline_values() {
        let k = SeedKernel::spline(2, 2.0).unwrap();
        assert_eq!(k.eval(&[0.0, 0.0]), 1.0);
        assert_eq!(k.eval(&[2.0, 0.0]), 0.0);
        // (1 - 1/2)^4 (4/2 + 1) at r = 1 with R = 2.
        assert_abs_diff_eq!(k.eval(&[0.6, 0.8]), 0.0625 * 3.0, epsilon = 1e-15);
        assert!(k.warnings().is_empty());
    }

    #[test]
    fn rejects_bad_kernels() {
        assert!(SeedKernel::triangle(0.0).is_err());
        assert!(SeedKernel::new(KernelFamily::Triangle1D, 2, 1.0).is_err());
        assert!(SeedKernel::spline(3, 1.0).is_err());
    }

    #[test]
    fn kt_examples() {
        let c = tri();
        assert_eq!(c.eval(2.0, &[0.0]).unwrap(), 2.0);
        assert_eq!(c.eval(5.0, &[1.0]).unwrap(), 0.0);
        let expected = 2f64.ln() - 0.5;
        assert_abs_diff_eq!(c.eval(5.0, &[0.5]).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(c.quadrature(5.0, 0.5).unwrap(), expected, epsilon = 1e-9);
        assert!(c.eval(-1.0, &[0.0]).is_err());
    }

    #[test]
    fn band_examples() {
        let c = tri();
        assert_eq!(c.band(1.0, 3.0, &[0.0]).unwrap(), 2.0);
        assert_eq!(c.band(2.5, 2.5, &[0.3]).unwrap(), 0.0);
        let expected = 2f64.ln() - 0.5;
        assert_abs_diff_eq!(c.band(0.0, 4.0, &[0.5]).unwrap(), expected, epsilon = 1e-15);
        assert!(c.band(3.0, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn triangle_branches_meet_at_kink() {
        // At |x| = e^{-t} both printed branches give t + |x| - 1.
        let c = tri();
        let t = 3.0;
        let x = (-t as f64).exp();
        let inner = t + x - x * t.exp();
        let outer = -x.ln() + x - 1.0;
        assert_abs_diff_eq!(inner, outer, epsilon = 1e-14);
        assert_abs_diff_eq!(c.closed_form(t, x * (1.0 - 1e-12)), c.closed_form(t, x), epsilon = 1e-10);
    }

    #[test]
    fn closed_form_and_quadrature_agree_on_lattice() {
        let kernels = [
            StarCovariance::new(SeedKernel::triangle(1.0).unwrap()),
            StarCovariance::new(SeedKernel::spline(1, 1.0).unwrap()),
            StarCovariance::new(SeedKernel::spline(2, 1.5).unwrap()),
        ];
        for c in &kernels {
            for i in 0..40 {
                for j in 0..25 {
                    let t = 0.3 * i as f64;
                    let r = 1.6 * j as f64 / 24.0;
                    let a = c.closed_form(t, r);
                    let b = c.quadrature(t, r).unwrap();
                    assert!((a - b).abs() < 1e-8, "t={t} r={r}: {a} vs {b}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn variance_equals_depth(t in 0.0f64..30.0) {
            prop_assert_eq!(tri().eval(t, &[0.0]).unwrap(), t);
        }

        #[test]
        fn stabilizes_in_t(x in 0.01f64..1.0, dt in 0.0f64..10.0) {
            let c = tri();
            let t0 = -x.ln();
            let a = c.eval(t0, &[x]).unwrap();
            let b = c.eval(t0 + dt, &[x]).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn nonincreasing_in_distance(t in 0.0f64..20.0, a in 0.0f64..1.2, b in 0.0f64..1.2) {
            let c = tri();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(c.eval(t, &[lo]).unwrap() >= c.eval(t, &[hi]).unwrap() - 1e-14);
        }

        #[test]
        fn nondecreasing_in_t(t in 0.0f64..20.0, dt in 0.0f64..5.0, r in 0.0f64..1.2) {
            for c in [tri(), StarCovariance::new(SeedKernel::spline(1, 1.0).unwrap())] {
                prop_assert!(c.eval_radial(t + dt, r).unwrap() >= c.eval_radial(t, r).unwrap() - 1e-14);
            }
        }

        #[test]
        fn band_is_difference(s in 0.0f64..8.0, w in 0.0f64..8.0, r in 0.0f64..1.0) {
            let c = tri();
            let t = s + w;
            let direct = c.eval_radial(t, r).unwrap() - c.eval_radial(s, r).unwrap();
            prop_assert!((c.band_radial(s, t, r).unwrap() - direct).abs() < 1e-12);
            prop_assert!(c.band_radial(s, t, r).unwrap() >= -1e-12);
        }
    }
}
