//! Statistics computed on synthetic output.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{check_range, Error, Result};
use crate::query::Query;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalBasis {
    OriginalN,
    SyntheticK,
    AccuracyAdjusted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEstimate {
    pub center: f64,
    pub half_width: f64,
    pub basis: IntervalBasis,
}

impl IntervalEstimate {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.lower()..=self.upper()).contains(&value)
    }
}

/// Wald interval for the proportion of records where `query` is 1, widened
/// by the synthetic data's accuracy: `p̂ ± (δ + z√(p̂(1−p̂)/n))`.
pub fn proportion_interval(
    query: &Query,
    synthetic: &Dataset,
    n_original: usize,
    accuracy_delta: f64,
) -> Result<IntervalEstimate> {
    check_range("accuracy_delta", accuracy_delta, accuracy_delta >= 0.0, "nonnegative")?;
    if n_original == 0 || synthetic.is_empty() {
        return Err(Error::ParameterOutOfRange {
            name: "n_original",
            value: n_original as f64,
            expected: "at least 1, with nonempty synthetic data",
        });
    }
    let mut ones = 0usize;
    for row in synthetic.rows() {
        let v = query.eval(row);
        if v == 1.0 {
            ones += 1;
        } else if v != 0.0 {
            return Err(Error::RangeViolation(format!("{} took value {v}", query.name())));
        }
    }
    let center = ones as f64 / synthetic.len() as f64;
    let wald = Z_95 * (center * (1.0 - center) / n_original as f64).sqrt();
    Ok(IntervalEstimate {
        center,
        half_width: accuracy_delta + wald,
        basis: IntervalBasis::AccuracyAdjusted,
    })
}

/// `n Σ (p_ℓ − q_ℓ)²/q_ℓ` and the first-order shift bound
/// `n Σ (2|p_ℓ − q_ℓ|δ + δ²)/q_ℓ`.
pub fn chi_square_adjusted(observed: &[f64], expected: &[f64], n: usize, accuracy_delta: f64) -> Result<(f64, f64)> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            left: observed.len(),
            right: expected.len(),
        });
    }
    if let Some(i) = expected.iter().position(|&q| q <= 0.0) {
        return Err(Error::ZeroExpected(i));
    }
    check_range("accuracy_delta", accuracy_delta, accuracy_delta >= 0.0, "nonnegative")?;
    let total: f64 = expected.iter().sum();
    check_range("sum(expected)", total, (total - 1.0).abs() <= 1e-9, "1")?;
    let n = n as f64;
    let d = accuracy_delta;
    let (mut stat, mut corr) = (0.0, 0.0);
    for (p, q) in observed.iter().zip(expected) {
        stat += (p - q) * (p - q) / q;
        corr += (2.0 * (p - q).abs() * d + d * d) / q;
    }
    Ok((n * stat, n * corr))
}

fn second_moment(data: &Dataset) -> DMatrix<f64> {
    let p = data.dim();
    let x = DMatrix::from_row_slice(data.len(), p, data.values());
    x.transpose() * &x / data.len() as f64
}

/// `‖XᵀX/n − YᵀY/k‖₂` by power iteration on the squared difference.
pub fn covariance_deviation(original: &Dataset, synthetic: &Dataset) -> Result<f64> {
    if original.dim() != synthetic.dim() {
        return Err(Error::DimensionMismatch {
            left: original.dim(),
            right: synthetic.dim(),
        });
    }
    if original.is_empty() || synthetic.is_empty() {
        return Err(Error::InvalidDataset("covariance needs nonempty data".into()));
    }
    let diff = second_moment(original) - second_moment(synthetic);
    Ok(spectral_norm(&diff))
}

fn spectral_norm(sym: &DMatrix<f64>) -> f64 {
    const TOL: f64 = 1e-8;
    const MAX_ITER: usize = 10_000;
    let p = sym.nrows();
    let sq = sym * sym;
    let mut v = DVector::from_fn(p, |i, _| 1.0 / (i + 1) as f64);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..MAX_ITER {
        let w = &sq * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= TOL * next.abs().max(f64::MIN_POSITIVE) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}
