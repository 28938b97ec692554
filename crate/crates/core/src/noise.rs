//! Laplace noise and its calibration.
//!
//! Draws use the inverse CDF `F⁻¹(u) = -σ·sgn(u-½)·ln(1 - 2|u-½|)` on an open
//! uniform, so each variate costs exactly one uniform and replays
//! deterministically from a seed. All logarithms are natural.

use crate::error::{check_range, Error, Result};
use crate::rng::SeededRng;

/// Scale σ of `Lap(σ)`, density `exp(-|x|/σ) / 2σ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LaplaceScale(f64);

impl LaplaceScale {
    pub fn new(scale: f64) -> Result<Self> {
        check_range("scale", scale, scale > 0.0 && scale.is_finite(), "positive and finite")?;
        Ok(Self(scale))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Scale `2/ε` used by the perturbed histogram.
    pub fn for_histogram(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::NonpositiveEpsilon(epsilon));
        }
        Self::new(2.0 / epsilon)
    }

    pub fn inverse_cdf(self, u: f64) -> f64 {
        let c = u - 0.5;
        -self.0 * c.signum() * (1.0 - 2.0 * c.abs()).ln()
    }

    pub fn sample(self, rng: &mut SeededRng) -> f64 {
        self.inverse_cdf(rng.open01())
    }
}

/// σ = δ / ln(|𝓕|/γ), the noise level of the minimax fit.
///
/// γ = 1/4 is accepted so the usual benchmark setting can be evaluated.
pub fn laplace_scale_for_generation(delta: f64, family_size: usize, gamma: f64) -> Result<LaplaceScale> {
    check_range("delta", delta, delta > 0.0 && delta <= 0.5, "(0, 1/2]")?;
    check_range("gamma", gamma, gamma > 0.0 && gamma <= 0.25, "(0, 1/4]")?;
    if family_size < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "family_size",
            value: family_size as f64,
            expected: "at least 2",
        });
    }
    scale_for_ratio(delta, family_size as f64 / gamma)
}

fn scale_for_ratio(delta: f64, ratio: f64) -> Result<LaplaceScale> {
    let log_term = ratio.ln();
    check_range("ln(|F|/gamma)", log_term, log_term > 0.0, "positive")?;
    LaplaceScale::new(delta / log_term)
}

pub fn sample_laplace(scale: LaplaceScale, count: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..count).map(|_| scale.sample(rng)).collect()
}

/// `σ ln(n) / γ`: with probability at least `1-γ` the maximum of `n` i.i.d.
/// `Lap(σ)` draws stays below this value.
///
/// `n` is real-valued so the envelope can be evaluated off the integers.
pub fn max_laplace_bound(scale: LaplaceScale, n: f64, gamma: f64) -> Result<f64> {
    check_range("n", n, n >= 2.0 && n.is_finite(), "at least 2")?;
    check_range("gamma", gamma, gamma > 0.0 && gamma <= 1.0, "(0, 1]")?;
    Ok(scale.get() * n.ln() / gamma)
}
