//! Bernstein polynomial approximation and the Bernstein mechanism.
//!
//! The iterated operator `B_k^{(j)} = I - (I - B_k)^j` acts on a function
//! only through its values on the lattice `{0, 1/k, ..., 1}`, so it can be
//! written as a plain Bernstein polynomial whose coefficients are a fixed
//! linear transform of those values. With `A[r][l] = b_{l,k}(r/k)` the
//! iterated basis is `b^{(j)}_l = Σ_r M[r][l] b_{r,k}` where
//! `M = Σ_{i=1}^{j} C(j,i) (-1)^{i-1} A^{i-1}`. Multivariate evaluation is
//! the tensor product of the per-axis bases, contracted one axis at a time.

use super::kde::{kde_sensitivity, GaussianKde, KdeConfig};
use super::{EstimateMetadata, ReferenceDistribution, ReferenceKind};
use crate::dataset::Dataset;
use crate::density::DiscreteDensity;
use crate::domain::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::noise::{sample_laplace, LaplaceScale};
use crate::rng::SeededRng;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `b_{l,k}(y) = C(k,l) y^l (1-y)^{k-l}`.
pub fn bernstein_basis(l: usize, k: usize, y: f64) -> Result<f64> {
    if l > k {
        return Err(Error::IndexOutOfRange { index: l, max: k });
    }
    Ok(basis_unchecked(l, k, y))
}

fn basis_unchecked(l: usize, k: usize, y: f64) -> f64 {
    binomial(k, l) * y.powi(l as i32) * (1.0 - y).powi((k - l) as i32)
}

fn basis_row(k: usize, y: f64) -> Vec<f64> {
    (0..=k).map(|l| basis_unchecked(l, k, y)).collect()
}

/// Order-`j` iterated Bernstein operator of degree `k`.
#[derive(Debug, Clone)]
pub struct IteratedBernstein {
    degree: usize,
    order: usize,
    /// `(k+1)×(k+1)` row-major coefficient transform `M`.
    transform: Vec<f64>,
}

impl IteratedBernstein {
    pub fn new(degree: usize, order: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "degree",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if order == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "order",
                value: 0.0,
                expected: "at least 1",
            });
        }
        let size = degree + 1;
        let mut a = vec![0.0; size * size];
        for r in 0..size {
            let row = basis_row(degree, r as f64 / degree as f64);
            a[r * size..(r + 1) * size].copy_from_slice(&row);
        }
        let matmul = |x: &[f64], y: &[f64]| {
            let mut out = vec![0.0; size * size];
            for i in 0..size {
                for l in 0..size {
                    let xil = x[i * size + l];
                    if xil != 0.0 {
                        for c in 0..size {
                            out[i * size + c] += xil * y[l * size + c];
                        }
                    }
                }
            }
            out
        };
        let mut power = vec![0.0; size * size];
        for i in 0..size {
            power[i * size + i] = 1.0;
        }
        let mut transform = vec![0.0; size * size];
        for i in 1..=order {
            let coeff = binomial(order, i) * if i % 2 == 1 { 1.0 } else { -1.0 };
            for (t, p) in transform.iter_mut().zip(&power) {
                *t += coeff * p;
            }
            if i < order {
                power = matmul(&power, &a);
            }
        }
        Ok(Self {
            degree,
            order,
            transform,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `b^{(j)}_{l,k}(y)` for `l = 0..=k`.
    pub fn basis(&self, y: f64) -> Vec<f64> {
        let size = self.degree + 1;
        let plain = basis_row(self.degree, y);
        (0..size)
            .map(|l| (0..size).map(|r| self.transform[r * size + l] * plain[r]).sum())
            .collect()
    }

    /// Evaluates at `y` given lattice values in lexicographic order
    /// (`(k+1)^p` entries, last coordinate fastest).
    pub fn evaluate(&self, lattice_values: &[f64], y: &[f64]) -> f64 {
        let size = self.degree + 1;
        debug_assert_eq!(lattice_values.len(), size.pow(y.len() as u32));
        let mut current = lattice_values.to_vec();
        for &coord in y.iter().rev() {
            let b = self.basis(coord);
            current = current
                .chunks(size)
                .map(|chunk| chunk.iter().zip(&b).map(|(v, w)| v * w).sum())
                .collect();
        }
        current[0]
    }

    /// Evaluates on the tensor grid `axis_points^p`, returned in
    /// lexicographic order.
    pub fn evaluate_grid(&self, lattice_values: &[f64], dim: usize, axis_points: &[f64]) -> Vec<f64> {
        let size = self.degree + 1;
        let g = axis_points.len();
        let bases: Vec<Vec<f64>> = axis_points.iter().map(|&y| self.basis(y)).collect();
        let mut shape = vec![size; dim];
        let mut current = lattice_values.to_vec();
        for axis in 0..dim {
            let outer: usize = shape[..axis].iter().product();
            let inner: usize = shape[axis + 1..].iter().product();
            let mut next = vec![0.0; outer * g * inner];
            for o in 0..outer {
                for (gi, b) in bases.iter().enumerate() {
                    let dst = &mut next[(o * g + gi) * inner..(o * g + gi + 1) * inner];
                    for (l, w) in b.iter().enumerate() {
                        let src = &current[(o * size + l) * inner..(o * size + l + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
            shape[axis] = g;
            current = next;
        }
        current
    }
}

/// Every point of `axis^dim` in lexicographic order, row-major.
fn tensor_grid(dim: usize, axis: &[f64]) -> Vec<f64> {
    let g = axis.len();
    let count = g.pow(dim as u32);
    let mut out = Vec::with_capacity(count * dim);
    let mut digits = vec![0usize; dim];
    for _ in 0..count {
        out.extend(digits.iter().map(|&d| axis[d]));
        for slot in digits.iter_mut().rev() {
            *slot += 1;
            if *slot < g {
                break;
            }
            *slot = 0;
        }
    }
    out
}

/// Points of `{0, 1/k, ..., 1}^dim` in lexicographic order, row-major.
pub fn lattice_points(dim: usize, k: usize) -> Result<Vec<f64>> {
    lattice_size(dim, k + 1)?;
    let axis: Vec<f64> = (0..=k).map(|l| l as f64 / k as f64).collect();
    Ok(tensor_grid(dim, &axis))
}

/// `B_k^{(j)}(f; y)` for `f: [0,1]^p → R`, using `f` on the lattice only.
pub fn iterated_bernstein<F>(f: F, k: usize, j: usize, y: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let op = IteratedBernstein::new(k, j)?;
    let values: Vec<f64> = lattice_points(y.len(), k)?.chunks(y.len()).map(&f).collect();
    Ok(op.evaluate(&values, y))
}

/// Laplace scale `λ = S(F)(k+1)/ε` of the lattice perturbation.
pub fn perturbation_scale(sensitivity: f64, lattice: usize, epsilon: f64) -> f64 {
    sensitivity * (lattice + 1) as f64 / epsilon
}

/// Default cells per axis when discretising a continuous estimate.
pub fn default_sampling_grid(dim: usize) -> usize {
    match dim {
        0..=2 => 32,
        3..=4 => 8,
        _ => 4,
    }
}

fn lattice_size(dim: usize, per_axis: usize) -> Result<usize> {
    let size = (per_axis as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if size > DEFAULT_ENUMERATION_CAP as u128 {
        return Err(Error::CapExceeded {
            size,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    Ok(size as usize)
}

/// The private release as a function: KDE lattice values plus `noise`,
/// smoothed by the iterated Bernstein operator. Returns the operator and the
/// perturbed lattice values.
pub fn bernstein_release(data: &Dataset, config: &KdeConfig, noise: &[f64]) -> Result<(IteratedBernstein, Vec<f64>)> {
    if data.domain().levels().is_some() {
        return Err(Error::DiscreteDomain);
    }
    let dim = data.dim();
    config.validate(dim)?;
    let nodes = lattice_size(dim, config.lattice + 1)?;
    if noise.len() != nodes {
        return Err(Error::DimensionMismatch {
            left: noise.len(),
            right: nodes,
        });
    }
    let kde = GaussianKde::new(data, config)?;
    let values: Vec<f64> = lattice_points(dim, config.lattice)?
        .chunks(dim)
        .zip(noise)
        .map(|(p, z)| kde.evaluate(p) + z)
        .collect();
    Ok((IteratedBernstein::new(config.lattice, config.order)?, values))
}

/// Bernstein-mechanism estimate with explicitly supplied lattice noise.
pub fn bernstein_mechanism_with_noise(
    data: &Dataset,
    config: &KdeConfig,
    noise: &[f64],
) -> Result<ReferenceDistribution> {
    let dim = data.dim();
    let (op, values) = bernstein_release(data, config, noise)?;
    let g = config.sampling_grid.unwrap_or_else(|| default_sampling_grid(dim));
    lattice_size(dim, g)?;
    let centers: Vec<f64> = (0..g).map(|c| (c as f64 + 0.5) / g as f64).collect();
    let surface = op.evaluate_grid(&values, dim, &centers);
    let mut clamped = 0;
    let masses: Vec<f64> = surface
        .into_iter()
        .map(|v| {
            if v > 0.0 {
                v
            } else {
                clamped += 1;
                0.0
            }
        })
        .collect();
    let domain = *data.domain();
    let support = tensor_grid(dim, &centers);
    let degenerate = clamped == masses.len();
    let density = if degenerate {
        let cells = masses.len();
        DiscreteDensity::new(domain, support, vec![1.0 / cells as f64; cells])?
    } else {
        DiscreteDensity::from_masses(domain, support, masses)?
    };
    Ok(ReferenceDistribution::new(
        ReferenceKind::BernsteinKde,
        density,
        EstimateMetadata {
            epsilon: Some(config.epsilon),
            bandwidth: Some(config.bandwidth),
            lattice: Some(config.lattice),
            bernstein_order: Some(config.order),
            sampling_grid: Some(g),
            clamped,
            degenerate,
            ..EstimateMetadata::default()
        },
    ))
}

/// Private KDE release: lattice KDE values perturbed with `Lap(λ)`,
/// `λ = S(F)(k+1)/ε`, then interpolated and discretised on the sampling
/// lattice. Negative cells are clamped to zero before normalising.
pub fn bernstein_mechanism(data: &Dataset, config: &KdeConfig, rng: &mut SeededRng) -> Result<ReferenceDistribution> {
    if data.domain().levels().is_some() {
        return Err(Error::DiscreteDomain);
    }
    let dim = data.dim();
    config.validate(dim)?;
    let nodes = lattice_size(dim, config.lattice + 1)?;
    let sensitivity = kde_sensitivity(data.len(), dim, config.bandwidth);
    let scale = LaplaceScale::new(perturbation_scale(sensitivity, config.lattice, config.epsilon))?;
    let noise = sample_laplace(scale, nodes, rng);
    let mut estimate = bernstein_mechanism_with_noise(data, config, &noise)?;
    estimate.metadata.noise_scale = Some(scale.get());
    estimate.metadata.sensitivity = Some(sensitivity);
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    /// Direct operator composition: `B_k^i f` as nested closures, combined
    /// with the binomial expansion of `I - (I - B_k)^j`. Shares nothing with
    /// the coefficient-transform path.
    fn oracle_iterated(f: &dyn Fn(f64) -> f64, k: usize, j: usize, y: f64) -> f64 {
        fn apply_power(f: &dyn Fn(f64) -> f64, k: usize, times: usize, y: f64) -> f64 {
            if times == 0 {
                return f(y);
            }
            (0..=k)
                .map(|l| {
                    let node = l as f64 / k as f64;
                    apply_power(f, k, times - 1, node) * basis_unchecked(l, k, y)
                })
                .sum()
        }
        (1..=j)
            .map(|i| {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                sign * binomial(j, i) * apply_power(f, k, i, y)
            })
            .sum()
    }

    #[test]
    fn basis_examples() {
        assert!((bernstein_basis(0, 1, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((bernstein_basis(1, 2, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let total: f64 = (0..=5).map(|l| bernstein_basis(l, 5, 0.37).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(bernstein_basis(3, 2, 0.5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn basis_nonnegative_and_partition_of_unity() {
        for k in 1..=20 {
            for i in 0..=50 {
                let y = i as f64 / 50.0;
                let row = basis_row(k, y);
                assert!(row.iter().all(|&b| b >= 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn order_one_is_plain_bernstein() {
        let f = |x: f64| (3.0 * x).sin() + x * x;
        for k in [1, 3, 7] {
            for i in 0..100 {
                let y = i as f64 / 99.0;
                let plain: f64 = (0..=k).map(|l| f(l as f64 / k as f64) * basis_unchecked(l, k, y)).sum();
                let iterated = iterated_bernstein(|p| f(p[0]), k, 1, &[y]).unwrap();
                assert!((plain - iterated).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_operator_composition_oracle() {
        let f = |x: f64| (2.5 * x).cos() * x + 0.3;
        for k in [2, 4, 6] {
            for j in 1..=3 {
                let op = IteratedBernstein::new(k, j).unwrap();
                let values: Vec<f64> = (0..=k).map(|l| f(l as f64 / k as f64)).collect();
                for y in [0.0, 0.13, 0.5, 0.77, 1.0] {
                    let fast = op.evaluate(&values, &[y]);
                    let slow = oracle_iterated(&f, k, j, y);
                    assert!((fast - slow).abs() < 1e-12, "k={k} j={j} y={y}: {fast} vs {slow}");
                }
            }
        }
    }

    #[test]
    fn reproduces_affine_and_constants() {
        for k in 1..=10 {
            for j in 1..=3 {
                let v = iterated_bernstein(|p| p[0], k, j, &[0.3]).unwrap();
                assert!((v - 0.3).abs() < 1e-12);
                let c = iterated_bernstein(|_| 2.5, k, j, &[0.71, 0.2]).unwrap();
                assert!((c - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_product_separable_function() {
        // for f(x, y) = g(x) h(y) the tensor operator factorises
        let g = |x: f64| x * x;
        let h = |y: f64| 1.0 - y;
        let k = 5;
        let j = 2;
        let y = [0.35, 0.8];
        let joint = iterated_bernstein(|p| g(p[0]) * h(p[1]), k, j, &y).unwrap();
        let gx = iterated_bernstein(|p| g(p[0]), k, j, &y[..1]).unwrap();
        let hy = iterated_bernstein(|p| h(p[0]), k, j, &y[1..]).unwrap();
        assert!((joint - gx * hy).abs() < 1e-12);
    }

    #[test]
    fn grid_matches_pointwise() {
        let op = IteratedBernstein::new(4, 2).unwrap();
        let values: Vec<f64> = lattice_points(2, 4)
            .unwrap()
            .chunks(2)
            .map(|p| (p[0] - 0.3).powi(2) + p[1])
            .collect();
        let axis = [0.1, 0.45, 0.9];
        let grid = op.evaluate_grid(&values, 2, &axis);
        for (i, a) in axis.iter().enumerate() {
            for (j, b) in axis.iter().enumerate() {
                let direct = op.evaluate(&values, &[*a, *b]);
                assert!((grid[i * 3 + j] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn approximation_improves_with_degree() {
        let f = |x: f64| (x - 0.4).abs();
        let errors: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&k| {
                (0..=64)
                    .map(|i| {
                        let y = i as f64 / 64.0;
                        (iterated_bernstein(|p| f(p[0]), k, 1, &[y]).unwrap() - f(y)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] <= w[0], "{errors:?}");
        }
    }

    #[test]
    fn perturbation_scale_formula() {
        assert!((perturbation_scale(0.1, 9, 0.5) - 2.0).abs() < 1e-15);
    }

    fn sample_interior(n: usize, seed: u64) -> Dataset {
        let mut rng = SeededRng::new(seed);
        let rows: Vec<f64> = (0..n).map(|_| 0.2 + 0.6 * rng.unit()).collect();
        Dataset::new(DomainSpec::continuous(1).unwrap(), rows).unwrap()
    }

    #[test]
    fn zero_noise_matches_interpolant() {
        let data = sample_interior(40, 1);
        let cfg = KdeConfig::new(0.1, 12, 2, 1.0).with_sampling_grid(16);
        let mu = bernstein_mechanism_with_noise(&data, &cfg, &[0.0; 13]).unwrap();
        let kde = GaussianKde::new(&data, &cfg).unwrap();
        let op = IteratedBernstein::new(12, 2).unwrap();
        let values: Vec<f64> = (0..=12).map(|l| kde.evaluate(&[l as f64 / 12.0])).collect();
        let raw: Vec<f64> = (0..16)
            .map(|c| op.evaluate(&values, &[(c as f64 + 0.5) / 16.0]).max(0.0))
            .collect();
        let total: f64 = raw.iter().sum();
        for (w, r) in mu.density().weights().iter().zip(&raw) {
            assert!((w - r / total).abs() < 1e-9);
        }
    }

    #[test]
    fn metadata_and_sampling() {
        let data = sample_interior(60, 2);
        let cfg = KdeConfig::for_data(&data, 1.0).unwrap();
        let mu = bernstein_mechanism(&data, &cfg, &mut SeededRng::new(3)).unwrap();
        let meta = mu.metadata();
        assert_eq!(meta.lattice, Some(16));
        assert_eq!(meta.bernstein_order, Some(2));
        assert_eq!(meta.sampling_grid, Some(32));
        let s = kde_sensitivity(60, 1, cfg.bandwidth);
        assert_eq!(meta.noise_scale, Some(perturbation_scale(s, 16, 1.0)));
        let draws = mu.sample(500, &mut SeededRng::new(4)).unwrap();
        assert!(draws.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
        // every draw lands in a cell with positive mass
        for &x in draws.values() {
            assert!(mu.evaluate(&[x]) > 0.0);
        }
    }

    #[test]
    fn mechanism_errors() {
        let discrete = Dataset::new(DomainSpec::boolean(1).unwrap(), vec![0.0]).unwrap();
        let cfg = KdeConfig::new(0.1, 4, 1, 1.0);
        assert!(matches!(
            bernstein_mechanism(&discrete, &cfg, &mut SeededRng::new(0)),
            Err(Error::DiscreteDomain)
        ));
        let wide = Dataset::new(DomainSpec::continuous(6).unwrap(), vec![0.5; 6]).unwrap();
        let big = KdeConfig::new(0.3, 15, 1, 1.0);
        assert!(matches!(
            bernstein_mechanism(&wide, &big, &mut SeededRng::new(0)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn all_negative_surface_falls_back() {
        let data = sample_interior(10, 5);
        let cfg = KdeConfig::new(0.1, 4, 1, 1.0).with_sampling_grid(8);
        let mu = bernstein_mechanism_with_noise(&data, &cfg, &[-1e6; 5]).unwrap();
        assert!(mu.metadata().degenerate);
        assert!(mu.density().weights().iter().all(|&w| (w - 0.125).abs() < 1e-15));
    }
}
