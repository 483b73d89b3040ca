//! One-sided stable variables.

use crate::rng::open_uniform;
use rand_distr::{Distribution, Exp1};
use std::f64::consts::PI;

/// Kanter's representation of a positive α-stable `S` with `E[e^{−λS}] = e^{−λ^α}`:
///
/// `S = sin(αU) / sin(U)^{1/α} · (sin((1−α)U) / E)^{(1−α)/α}`,
/// `U ~ Uniform(0, π)`, `E ~ Exp(1)`. Returns exactly 1 for `α = 1`.
pub fn sample_positive_stable<R: rand::Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * open_uniform(rng);
    let e: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return 1.0;
    }
    let log_s = (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    log_s.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, StreamKey};

    #[test]
    fn laplace_transform_matches() {
        let mut rng = StreamKey::new(5, 0, 0, Purpose::Subordination).rng();
        for alpha in [0.3, 0.5, 0.8] {
            let draws: Vec<f64> = (0..40_000).map(|_| sample_positive_stable(alpha, &mut rng)).collect();
            for lambda in [0.5, 1.0, 2.0] {
                let vals: Vec<f64> = draws.iter().map(|s| (-lambda * s).exp()).collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
                let se = (var / vals.len() as f64).sqrt();
                let exact = (-f64::powf(lambda, alpha)).exp();
                assert!((mean - exact).abs() < 4.0 * se, "α={alpha} λ={lambda}: {mean} vs {exact}");
            }
        }
    }

    #[test]
    fn half_stable_matches_levy_cdf() {
        // α = 1/2: S has the Lévy law with P(S ≤ x) = erfc(1/(2√x)).
        let mut rng = StreamKey::new(6, 0, 0, Purpose::Subordination).rng();
        let n = 40_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_positive_stable(0.5, &mut rng)).collect();
        for x in [0.1, 0.5, 2.0, 10.0] {
            let emp = draws.iter().filter(|&&s| s <= x).count() as f64 / n as f64;
            let exact = statrs::function::erf::erfc(1.0 / (2.0 * f64::sqrt(x)));
            assert!((emp - exact).abs() < 4.0 * (exact * (1.0 - exact) / n as f64).sqrt() + 1e-3);
        }
    }
}
