use nalgebra::{DMatrix, SymmetricEigen};

use crate::dataset::Dataset;
use crate::error::{check_range, Error, Result};

const NORM_TOLERANCE: f64 = 1e-9;

/// Settings for the Gaussian KDE and its Bernstein-mechanism release.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeConfig {
    pub bandwidth: f64,
    /// Row-major `p×p` shape matrix `H₀`; `None` is the identity.
    pub bandwidth_matrix: Option<Vec<f64>>,
    /// Lattice resolution `k` of the cover `{0, 1/k, ..., 1}^p`.
    pub lattice: usize,
    /// Order `j` of the iterated Bernstein operator.
    pub order: usize,
    pub epsilon: f64,
    /// Cells per axis of the sampling lattice; `None` picks
    /// [`super::default_sampling_grid`].
    pub sampling_grid: Option<usize>,
}

impl KdeConfig {
    pub fn new(bandwidth: f64, lattice: usize, order: usize, epsilon: f64) -> Self {
        Self {
            bandwidth,
            bandwidth_matrix: None,
            lattice,
            order,
            epsilon,
            sampling_grid: None,
        }
    }

    /// Default bandwidth for `data` with lattice 16 and order 2.
    pub fn for_data(data: &Dataset, epsilon: f64) -> Result<Self> {
        Ok(Self::new(
            default_bandwidth(data.len(), data.dim(), 1.0)?,
            16,
            2,
            epsilon,
        ))
    }

    pub fn with_bandwidth_matrix(mut self, matrix: Vec<f64>) -> Self {
        self.bandwidth_matrix = Some(matrix);
        self
    }

    pub fn with_sampling_grid(mut self, cells: usize) -> Self {
        self.sampling_grid = Some(cells);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        check_range(
            "bandwidth",
            self.bandwidth,
            self.bandwidth > 0.0 && self.bandwidth.is_finite(),
            "positive",
        )?;
        if self.lattice == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "lattice",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if self.order == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "order",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::NonpositiveEpsilon(self.epsilon));
        }
        if self.sampling_grid == Some(0) {
            return Err(Error::ParameterOutOfRange {
                name: "sampling_grid",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if let Some(m) = &self.bandwidth_matrix {
            whitening(m, dim)?;
        }
        Ok(())
    }
}

/// `C′ (ln n / n)^{1/p}`.
pub fn default_bandwidth(n: usize, dim: usize, c_prime: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "n",
            value: n as f64,
            expected: "at least 2 for the default bandwidth",
        });
    }
    let n = n as f64;
    Ok(c_prime * (n.ln() / n).powf(1.0 / dim as f64))
}

/// `2 k(0) / (n h^p)` with `k(0) = (2π)^{-p/2}`: replacing one record moves
/// one kernel term, each bounded by `k(0)/(n h^p)`.
pub fn kde_sensitivity(n: usize, dim: usize, bandwidth: f64) -> f64 {
    2.0 * kernel_peak(dim) / (n as f64 * bandwidth.powi(dim as i32))
}

fn kernel_peak(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0)
}

/// `H₀^{-1/2}` for a symmetric positive-definite matrix with unit spectral
/// norm.
fn whitening(matrix: &[f64], dim: usize) -> Result<DMatrix<f64>> {
    if matrix.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            left: matrix.len(),
            right: dim * dim,
        });
    }
    let h0 = DMatrix::from_row_slice(dim, dim, matrix);
    if (&h0 - h0.transpose()).amax() > 1e-12 {
        return Err(Error::ParameterOutOfRange {
            name: "bandwidth_matrix",
            value: (&h0 - h0.transpose()).amax(),
            expected: "symmetric",
        });
    }
    let eig = SymmetricEigen::new(h0);
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    check_range("bandwidth_matrix eigenvalue", min, min > 0.0, "positive definite")?;
    check_range(
        "bandwidth_matrix spectral norm",
        max,
        (max - 1.0).abs() <= NORM_TOLERANCE,
        "equal to 1",
    )?;
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose())
}

/// A Gaussian KDE prepared for repeated evaluation:
/// `ν₁(x) = (1/(n h^p)) Σ_i (2π)^{-p/2} exp(-|H₀^{-1/2}(x - x_i)/h|² / 2)`.
#[derive(Debug, Clone)]
pub struct GaussianKde<'a> {
    data: &'a Dataset,
    bandwidth: f64,
    whitening: Option<DMatrix<f64>>,
    scale: f64,
}

impl<'a> GaussianKde<'a> {
    pub fn new(data: &'a Dataset, config: &KdeConfig) -> Result<Self> {
        if data.domain().levels().is_some() {
            return Err(Error::DiscreteDomain);
        }
        let dim = data.dim();
        check_range(
            "bandwidth",
            config.bandwidth,
            config.bandwidth > 0.0 && config.bandwidth.is_finite(),
            "positive",
        )?;
        let whitening = config
            .bandwidth_matrix
            .as_deref()
            .map(|m| whitening(m, dim))
            .transpose()?;
        let scale = kernel_peak(dim) / (data.len() as f64 * config.bandwidth.powi(dim as i32));
        Ok(Self {
            data,
            bandwidth: config.bandwidth,
            whitening,
            scale,
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let dim = self.data.dim();
        let inv_h = 1.0 / self.bandwidth;
        let mut diff = vec![0.0; dim];
        let total: f64 = self
            .data
            .rows()
            .map(|row| {
                for ((d, a), b) in diff.iter_mut().zip(x).zip(row) {
                    *d = (a - b) * inv_h;
                }
                let sq = match &self.whitening {
                    None => diff.iter().map(|v| v * v).sum::<f64>(),
                    Some(w) => (0..dim)
                        .map(|r| {
                            let v: f64 = (0..dim).map(|c| w[(r, c)] * diff[c]).sum();
                            v * v
                        })
                        .sum(),
                };
                (-0.5 * sq).exp()
            })
            .sum();
        self.scale * total
    }
}

pub fn kde_evaluate(data: &Dataset, config: &KdeConfig, x: &[f64]) -> Result<f64> {
    if x.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: data.dim(),
        });
    }
    Ok(GaussianKde::new(data, config)?.evaluate(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::rng::SeededRng;
    use std::f64::consts::PI;

    fn cube(dim: usize) -> DomainSpec {
        DomainSpec::continuous(dim).unwrap()
    }

    #[test]
    fn single_point_peak() {
        for (dim, h) in [(1, 0.1), (2, 0.3), (3, 0.05)] {
            let x1 = vec![0.4; dim];
            let data = Dataset::new(cube(dim), x1.clone()).unwrap();
            let cfg = KdeConfig::new(h, 4, 1, 1.0);
            let v = kde_evaluate(&data, &cfg, &x1).unwrap();
            let expected = (2.0 * PI).powf(-(dim as f64) / 2.0) / f64::powi(h, dim as i32);
            assert!((v - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn one_bandwidth_away() {
        let h = 0.2;
        let data = Dataset::new(cube(1), vec![0.0]).unwrap();
        let v = kde_evaluate(&data, &KdeConfig::new(h, 4, 1, 1.0), &[h]).unwrap();
        let expected = (-0.5f64).exp() / (h * (2.0 * PI).sqrt());
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn integrates_to_one_for_interior_data() {
        let mut rng = SeededRng::new(4);
        let rows: Vec<f64> = (0..200).map(|_| 0.3 + 0.4 * rng.unit()).collect();
        let data = Dataset::new(cube(1), rows).unwrap();
        let cfg = KdeConfig::new(0.05, 4, 1, 1.0);
        let kde = GaussianKde::new(&data, &cfg).unwrap();
        // midpoint rule on 2000 cells
        let cells = 2000;
        let integral: f64 = (0..cells)
            .map(|i| kde.evaluate(&[(i as f64 + 0.5) / cells as f64]))
            .sum::<f64>()
            / cells as f64;
        assert!((integral - 1.0).abs() < 0.02, "{integral}");
    }

    #[test]
    fn translation_consistent() {
        let rows = vec![0.1, 0.25, 0.3, 0.42];
        let shifted: Vec<f64> = rows.iter().map(|x| x + 0.37).collect();
        let cfg = KdeConfig::new(0.08, 4, 1, 1.0);
        let a = kde_evaluate(&Dataset::new(cube(1), rows).unwrap(), &cfg, &[0.2]).unwrap();
        let b = kde_evaluate(&Dataset::new(cube(1), shifted).unwrap(), &cfg, &[0.57]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn identity_matrix_matches_default() {
        let data = Dataset::new(cube(2), vec![0.1, 0.2, 0.7, 0.4, 0.5, 0.5]).unwrap();
        let plain = KdeConfig::new(0.2, 4, 1, 1.0);
        let explicit = plain.clone().with_bandwidth_matrix(vec![1.0, 0.0, 0.0, 1.0]);
        let a = kde_evaluate(&data, &plain, &[0.3, 0.3]).unwrap();
        let b = kde_evaluate(&data, &explicit, &[0.3, 0.3]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn anisotropic_matrix_whitens() {
        // H₀ = diag(1, 1/4): the second axis is measured at twice the scale
        let data = Dataset::new(cube(2), vec![0.5, 0.5]).unwrap();
        let cfg = KdeConfig::new(0.1, 4, 1, 1.0).with_bandwidth_matrix(vec![1.0, 0.0, 0.0, 0.25]);
        let v = kde_evaluate(&data, &cfg, &[0.5, 0.55]).unwrap();
        let expected = (-0.5f64).exp() / (2.0 * PI * 0.01);
        assert!((v - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn rejects_bad_inputs() {
        let discrete = Dataset::new(DomainSpec::boolean(1).unwrap(), vec![1.0]).unwrap();
        let cfg = KdeConfig::new(0.1, 4, 1, 1.0);
        assert!(matches!(
            kde_evaluate(&discrete, &cfg, &[1.0]),
            Err(Error::DiscreteDomain)
        ));
        let data = Dataset::new(cube(2), vec![0.5, 0.5]).unwrap();
        let not_unit = cfg.clone().with_bandwidth_matrix(vec![2.0, 0.0, 0.0, 1.0]);
        assert!(kde_evaluate(&data, &not_unit, &[0.5, 0.5]).is_err());
        let asym = cfg.clone().with_bandwidth_matrix(vec![1.0, 0.1, 0.0, 1.0]);
        assert!(kde_evaluate(&data, &asym, &[0.5, 0.5]).is_err());
        let indefinite = cfg.clone().with_bandwidth_matrix(vec![1.0, 0.0, 0.0, -0.5]);
        assert!(kde_evaluate(&data, &indefinite, &[0.5, 0.5]).is_err());
        assert!(KdeConfig::new(0.0, 4, 1, 1.0).validate(1).is_err());
        assert!(KdeConfig::new(0.1, 0, 1, 1.0).validate(1).is_err());
        assert!(KdeConfig::new(0.1, 4, 0, 1.0).validate(1).is_err());
        assert!(KdeConfig::new(0.1, 4, 1, 0.0).validate(1).is_err());
    }

    #[test]
    fn bandwidth_and_sensitivity() {
        let h = default_bandwidth(100, 2, 1.0).unwrap();
        assert!((h - (100f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!(default_bandwidth(1, 1, 1.0).is_err());
        let s = kde_sensitivity(50, 1, 0.1);
        assert!((s - 2.0 / ((2.0 * PI).sqrt() * 5.0)).abs() < 1e-15);
    }
}
