//! Dense semidefinite Cholesky factor of a layer covariance.

use super::GridSpec;
use crate::error::{Error, Result};
use crate::kernels::StarCovariance;
use crate::rng::std_normal;
use crate::scalar::Scalar;

/// Packed row-major lower triangle.
pub(crate) struct LowerFactor<T> {
    dim: usize,
    packed: Vec<T>,
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl<T: Scalar> LowerFactor<T> {
    pub(crate) fn new(cov: &StarCovariance, grid: &GridSpec, s: f64, t: f64) -> Result<Self> {
        let n = grid.cell_count();
        let mut a = vec![0.0f64; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                a[row_start(i) + j] = cov.band_radial(s, t, grid.distance(i, j))?;
            }
        }
        factor_in_place(&mut a, n)?;
        Ok(LowerFactor {
            dim: n,
            packed: a.into_iter().map(T::lit).collect(),
        })
    }

    pub(crate) fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let z: Vec<T> = (0..self.dim).map(|_| T::lit(std_normal(rng))).collect();
        (0..self.dim)
            .map(|i| {
                let row = &self.packed[row_start(i)..row_start(i) + i + 1];
                row.iter().zip(&z).fold(T::zero(), |acc, (&l, &x)| acc + l * x)
            })
            .collect()
    }
}

/// In-place Cholesky of a packed symmetric matrix. Pivots down to
/// `-1e-8 × max diagonal` are treated as zero (semidefinite); anything below fails.
pub(crate) fn factor_in_place(a: &mut [f64], n: usize) -> Result<()> {
    let scale = (0..n).map(|i| a[row_start(i) + i]).fold(0.0, f64::max);
    let tol = 1e-8 * scale;
    for j in 0..n {
        let rj = row_start(j);
        let mut d = a[rj + j];
        for k in 0..j {
            d -= a[rj + k] * a[rj + k];
        }
        if d < -tol {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: d,
                index: j,
                largest: scale,
            });
        }
        if d <= tol {
            for i in j..n {
                a[row_start(i) + j] = 0.0;
            }
            continue;
        }
        let l = d.sqrt();
        a[rj + j] = l;
        for i in j + 1..n {
            let ri = row_start(i);
            let mut v = a[ri + j];
            for k in 0..j {
                v -= a[ri + k] * a[rj + k];
            }
            a[ri + j] = v / l;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_matrix() {
        // [[4, 2, 0], [2, 5, 3], [0, 3, 10]]
        let mut a = vec![4.0, 2.0, 5.0, 0.0, 3.0, 10.0];
        factor_in_place(&mut a, 3).unwrap();
        let l = |i: usize, j: usize| if j <= i { a[row_start(i) + j] } else { 0.0 };
        let orig = [[4.0, 2.0, 0.0], [2.0, 5.0, 3.0], [0.0, 3.0, 10.0]];
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l(i, k) * l(j, k)).sum();
                assert!((v - orig[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn semidefinite_is_accepted() {
        let mut a = vec![1.0, 1.0, 1.0];
        factor_in_place(&mut a, 2).unwrap();
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut a = vec![1.0, 2.0, 1.0];
        assert!(matches!(
            factor_in_place(&mut a, 2),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }
}
