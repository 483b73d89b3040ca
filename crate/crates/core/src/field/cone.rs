//! Cone construction of the one-dimensional field.
//!
//! `X_t(x)` is the Gaussian white noise of control `du dy / y²` integrated over
//! the cone `{R e^{-t} ≤ y ≤ R, |x - u| ≤ y/2}`. The `y` range is cut into
//! logarithmic bands; within a band the cone section is replaced by a
//! rectangle of the same control mass, so the band contribution is a
//! difference of one Brownian motion in `u` at `x ± w/2`.

use super::{GridSpec, ScaleLadder};
use crate::rng::std_normal;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeBand {
    pub lower: f64,
    pub upper: f64,
    /// Rectangle width `ln(b/a) / (1/a - 1/b)`.
    pub width: f64,
    /// Control mass per unit `u`, `1/a - 1/b`.
    pub rate: f64,
}

impl ConeBand {
    fn new(lower: f64, upper: f64) -> Self {
        let rate = 1.0 / lower - 1.0 / upper;
        ConeBand {
            lower,
            upper,
            width: (upper / lower).ln() / rate,
            rate,
        }
    }

    /// Control mass of the rectangle.
    pub fn control_mass(&self) -> f64 {
        self.rate * self.width
    }

    /// Covariance contributed at separation `delta`.
    pub fn covariance(&self, delta: f64) -> f64 {
        self.rate * (self.width - delta.abs()).max(0.0)
    }
}

/// The banded half-plane for a whole ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePlane {
    /// Bands per layer, in ladder order.
    layers: Vec<Vec<ConeBand>>,
}

pub(crate) struct ConeLayer {
    bands: Vec<ConeBand>,
}

impl ConePlane {
    /// At least `max(bands_per_unit, 64 / t_max)` bands per unit of `t`, one or more per layer.
    pub fn for_ladder(ladder: &ScaleLadder, support_radius: f64, bands_per_unit: usize) -> Self {
        let t_max = ladder.t_max();
        let density = if t_max > 0.0 {
            (bands_per_unit as f64).max(64.0 / t_max)
        } else {
            bands_per_unit as f64
        };
        let layers = (1..=ladder.layers())
            .map(|j| {
                let (s, t) = (ladder.time(j - 1), ladder.time(j));
                let k = ((t - s) * density).ceil().max(1.0) as usize;
                (0..k)
                    .map(|i| {
                        let lo = s + (t - s) * i as f64 / k as f64;
                        let hi = s + (t - s) * (i + 1) as f64 / k as f64;
                        ConeBand::new(support_radius * (-hi).exp(), support_radius * (-lo).exp())
                    })
                    .collect()
            })
            .collect();
        ConePlane { layers }
    }

    pub fn bands(&self) -> impl Iterator<Item = &ConeBand> {
        self.layers.iter().flatten()
    }

    pub fn band_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Covariance of the discretized field at separation `delta`.
    pub fn covariance(&self, delta: f64) -> f64 {
        self.bands().map(|b| b.covariance(delta)).sum()
    }

    pub(crate) fn layer(&self, j: usize) -> ConeLayer {
        ConeLayer {
            bands: self.layers[j - 1].clone(),
        }
    }
}

impl ConeLayer {
    pub(crate) fn sample<T: Scalar, R: rand::Rng + ?Sized>(&self, grid: &GridSpec, rng: &mut R) -> Vec<T> {
        let n = grid.cell_count();
        let h = grid.spacing();
        let mut out = vec![0.0f64; n];
        let mut left = vec![0.0f64; n];
        for band in &self.bands {
            let w = band.width;
            // Points p_i = x_i - w/2 and q_i = p_i + w, merged in increasing order.
            let p = |i: usize| (i as f64 + 0.5) * h - 0.5 * w;
            let (mut i, mut k) = (0usize, 0usize);
            let mut b = 0.0;
            let mut last = p(0);
            while k < n {
                let next_p = if i < n { p(i) } else { f64::INFINITY };
                let next_q = p(k) + w;
                let take_p = next_p <= next_q;
                let x = if take_p { next_p } else { next_q };
                let gap = (x - last).max(0.0);
                b += (band.rate * gap).sqrt() * std_normal(rng);
                last = x;
                if take_p {
                    left[i] = b;
                    i += 1;
                } else {
                    out[k] += b - left[k];
                    k += 1;
                }
            }
        }
        out.into_iter().map(T::lit).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{SeedKernel, StarCovariance};

    #[test]
    fn control_mass_telescopes() {
        let ladder = ScaleLadder::uniform(6.0, 0.05).unwrap();
        let plane = ConePlane::for_ladder(&ladder, 1.0, 16);
        assert!(plane.band_count() >= 64);
        let total: f64 = plane.bands().map(ConeBand::control_mass).sum();
        assert!((total - 6.0).abs() <= 1e-9 * 6.0);
        assert!(plane.bands().all(|b| b.control_mass() > 0.0));
    }

    #[test]
    fn discretized_covariance_is_close_to_closed_form() {
        let ladder = ScaleLadder::uniform(6.0, 1.0).unwrap();
        let plane = ConePlane::for_ladder(&ladder, 1.0, 16);
        let cov = StarCovariance::new(SeedKernel::triangle(1.0).unwrap());
        for i in 0..=256 {
            let d = i as f64 / 256.0;
            let exact = cov.eval_radial(6.0, d).unwrap();
            assert!((plane.covariance(d) - exact).abs() < 0.02, "d={d}");
        }
        assert_eq!(plane.covariance(1.0), 0.0);
        assert!((plane.covariance(0.0) - 6.0).abs() < 1e-12);
    }
}
