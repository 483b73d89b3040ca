//! Circulant embedding of a stationary layer covariance.

use super::{next_smooth, normal_pair, GridSpec};
use crate::error::{Error, Result};
use crate::kernels::StarCovariance;
use crate::scalar::Scalar;
use rustfft::{num_complex::Complex, Fft, FftNum, FftPlanner};
use std::sync::Arc;

/// Forward 2-D transform of an `m × m` row-major buffer.
pub fn fft2_in_place<T: FftNum>(buf: &mut [Complex<T>], m: usize, fft: &dyn Fft<T>) {
    fft.process(buf);
    let mut col = vec![Complex::new(T::zero(), T::zero()); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = buf[i * m + j];
        }
        fft.process(&mut col);
        for i in 0..m {
            buf[i * m + j] = col[i];
        }
    }
}

/// Torus geometry and FFT plan shared by every layer of a sampler.
pub struct CirculantPlan<T: FftNum> {
    dimension: usize,
    torus: usize,
    spacing: f64,
    fft: Arc<dyn Fft<T>>,
}

/// `sqrt(λ_k / N)` for the torus eigenvalues of one layer.
pub struct CirculantFactor<T> {
    sqrt_scaled: Vec<T>,
    clipped: usize,
}

impl<T> CirculantFactor<T> {
    /// Count of eigenvalues in `[-1e-8 λ_max, 0)` that were set to zero.
    pub fn clipped(&self) -> usize {
        self.clipped
    }
}

impl<T: Scalar> CirculantPlan<T> {
    /// Torus period of at least `2L + R`, rounded up to a 5-smooth number of cells.
    pub fn new(grid: &GridSpec, support_radius: f64) -> Self {
        let h = grid.spacing();
        let needed = ((2.0 * grid.extent() + support_radius) / h - 1e-9).ceil() as usize;
        let torus = next_smooth(needed.max(2 * grid.cells_per_axis()));
        let fft = FftPlanner::<T>::new().plan_fft_forward(torus);
        CirculantPlan {
            dimension: grid.dimension(),
            torus,
            spacing: h,
            fft,
        }
    }

    pub fn torus(&self) -> usize {
        self.torus
    }

    /// Number of torus points.
    pub fn len(&self) -> usize {
        self.torus.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn wrapped(&self, k: usize) -> f64 {
        k.min(self.torus - k) as f64
    }

    /// Eigenvalues of the band covariance on the torus.
    pub fn eigenvalues(&self, cov: &StarCovariance, s: f64, t: f64) -> Result<Vec<f64>> {
        let m = self.torus;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
        let mut buf: Vec<Complex<f64>> = match self.dimension {
            1 => (0..m)
                .map(|k| cov.band_radial(s, t, self.spacing * self.wrapped(k)).map(|c| Complex::new(c, 0.0)))
                .collect::<Result<_>>()?,
            _ => {
                // Radial kernel: evaluate one quadrant and mirror.
                let half = m / 2 + 1;
                let mut quad = vec![0.0; half * half];
                for a in 0..half {
                    for b in 0..=a {
                        let v = cov.band_radial(s, t, self.spacing * (a as f64).hypot(b as f64))?;
                        quad[a * half + b] = v;
                        quad[b * half + a] = v;
                    }
                }
                (0..m * m)
                    .map(|idx| {
                        let (a, b) = (self.wrapped(idx / m) as usize, self.wrapped(idx % m) as usize);
                        Complex::new(quad[a * half + b], 0.0)
                    })
                    .collect()
            }
        };
        match self.dimension {
            1 => fft.process(&mut buf),
            _ => fft2_in_place(&mut buf, m, fft.as_ref()),
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    pub fn factor(&self, cov: &StarCovariance, s: f64, t: f64) -> Result<CirculantFactor<T>> {
        let eig = self.eigenvalues(cov, s, t)?;
        let largest = eig.iter().copied().fold(0.0, f64::max);
        let count = eig.len() as f64;
        let mut clipped = 0;
        let mut sqrt_scaled = Vec::with_capacity(eig.len());
        for (index, &l) in eig.iter().enumerate() {
            if l < -1e-8 * largest {
                return Err(Error::NotPositiveDefinite {
                    eigenvalue: l,
                    index,
                    largest,
                });
            }
            if l < 0.0 {
                clipped += 1;
            }
            sqrt_scaled.push(T::lit((l.max(0.0) / count).sqrt()));
        }
        Ok(CirculantFactor { sqrt_scaled, clipped })
    }

    /// Real part of `FFT(sqrt(λ/N) ξ)` restricted to the grid, `ξ` complex standard normal.
    pub fn sample<R: rand::Rng + ?Sized>(&self, f: &CirculantFactor<T>, grid: &GridSpec, rng: &mut R) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = f
            .sqrt_scaled
            .iter()
            .map(|&w| {
                let (a, b) = normal_pair(rng);
                Complex::new(w * T::lit(a), w * T::lit(b))
            })
            .collect();
        let n = grid.cells_per_axis();
        let m = self.torus;
        match self.dimension {
            1 => {
                self.fft.process(&mut buf);
                buf[..n].iter().map(|c| c.re).collect()
            }
            _ => {
                fft2_in_place(&mut buf, m, self.fft.as_ref());
                (0..n * n).map(|idx| buf[(idx / n) * m + idx % n].re).collect()
            }
        }
    }
}
