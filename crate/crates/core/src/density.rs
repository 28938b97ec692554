use std::collections::HashSet;

use crate::dataset::Dataset;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Tolerance on `sum(weights) == 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Probability vector over a finite list of distinct domain points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDensity {
    domain: DomainSpec,
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteDensity {
    pub fn new(domain: DomainSpec, support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if weights.is_empty() || support.len() != weights.len() * dim {
            return Err(Error::InvalidDensity(format!(
                "{} weights for {} support coordinates of dimension {dim}",
                weights.len(),
                support.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDensity(format!("weight {i} is {}", weights[i])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDensity(format!("weights sum to {total}")));
        }
        let mut seen = HashSet::with_capacity(weights.len());
        for (i, point) in support.chunks(dim).enumerate() {
            if !seen.insert(point.iter().map(|x| x.to_bits()).collect::<Vec<_>>()) {
                return Err(Error::InvalidDensity(format!("support point {i} is a duplicate")));
            }
        }
        Ok(Self {
            domain,
            support,
            weights,
        })
    }

    /// Normalises nonnegative masses into a density. Fails if the masses sum
    /// to zero.
    pub fn from_masses(domain: DomainSpec, support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDensity(format!("masses sum to {total}")));
        }
        let weights = masses.into_iter().map(|m| m / total).collect();
        Self::new(domain, support, weights)
    }

    /// Uniform weights over every point of a discrete domain, in
    /// enumeration order.
    pub fn uniform(domain: DomainSpec) -> Result<Self> {
        let support = domain.enumerate()?;
        let size = support.len() / domain.dim();
        Ok(Self {
            domain,
            support,
            weights: vec![1.0 / size as f64; size],
        })
    }

    /// Explicit weights over the full enumeration of a discrete domain.
    pub fn over_domain(domain: DomainSpec, weights: Vec<f64>) -> Result<Self> {
        let support = domain.enumerate()?;
        Self::new(domain, support, weights)
    }

    /// Point mass on `point`.
    pub fn point_mass(domain: DomainSpec, point: &[f64]) -> Result<Self> {
        Self::new(domain, point.to_vec(), vec![1.0])
    }

    /// Empirical frequencies of `data` over the full enumeration of its
    /// discrete domain.
    pub fn empirical(data: &Dataset) -> Result<Self> {
        let domain = *data.domain();
        let support = domain.enumerate()?;
        let mut counts = vec![0.0; support.len() / domain.dim()];
        for row in data.rows() {
            counts[domain.index_of(row).expect("rows lie in the domain")] += 1.0;
        }
        let n = data.len() as f64;
        let weights = counts.into_iter().map(|c| c / n).collect();
        Ok(Self {
            domain,
            support,
            weights,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.domain.dim();
        &self.support[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.support.chunks(self.domain.dim())
    }

    /// Same domain and identical support points in the same order.
    pub fn same_support(&self, other: &Self) -> bool {
        self.domain == other.domain && self.support == other.support
    }

    pub fn sampler(&self) -> CategoricalSampler {
        CategoricalSampler::new(&self.weights)
    }

    /// Writes one line per support point: coordinates then weight.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.domain.dim()).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        out.write_record(&header)?;
        for (point, w) in self.points().zip(&self.weights) {
            let mut cells: Vec<String> = point.iter().map(|x| format!("{x}")).collect();
            cells.push(format!("{w}"));
            out.write_record(&cells)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Inverse-CDF sampler over indices `0..weights.len()` in stored order.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let total = *self.cumulative.last().expect("nonempty");
        let target = rng.unit() * total;
        // first index whose cumulative mass exceeds the target
        let idx = self.cumulative.partition_point(|&c| c <= target);
        // guard against rounding at the top end and trailing zero weights
        let mut idx = idx.min(self.cumulative.len() - 1);
        while idx > 0 && self.cumulative[idx] == self.cumulative[idx - 1] {
            idx -= 1;
        }
        idx
    }
}

/// Draws `count` i.i.d. points from `density`.
pub fn sample_density(density: &DiscreteDensity, count: usize, rng: &mut SeededRng) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "count",
            value: 0.0,
            expected: "at least 1",
        });
    }
    let sampler = density.sampler();
    let dim = density.domain.dim();
    let mut values = Vec::with_capacity(count * dim);
    for _ in 0..count {
        values.extend_from_slice(density.point(sampler.sample(rng)));
    }
    Ok(Dataset::new_unchecked(density.domain, values))
}
