//! Reference distributions for the reduced-support draw.
//!
//! Every estimator returns a [`ReferenceDistribution`]: a [`DiscreteDensity`]
//! plus enough metadata to reproduce it from the same seed. Continuous
//! estimates are stored as a normalised density over a regular cell lattice
//! of `[0,1]^p`; sampling picks a cell, then a uniform point inside it.

mod bernstein;
mod histogram;
mod kde;

pub use bernstein::{
    bernstein_basis, bernstein_mechanism, bernstein_mechanism_with_noise, bernstein_release, default_sampling_grid,
    iterated_bernstein, lattice_points, perturbation_scale, IteratedBernstein,
};
pub use histogram::{histogram_counts, perturbed_histogram, perturbed_histogram_with_noise};
pub use kde::{default_bandwidth, kde_evaluate, kde_sensitivity, GaussianKde, KdeConfig};

use crate::dataset::Dataset;
use crate::density::DiscreteDensity;
use crate::domain::DomainSpec;
use crate::error::Result;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceKind {
    Uniform,
    PerturbedHistogram,
    BernsteinKde,
}

impl ReferenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::PerturbedHistogram => "histogram",
            Self::BernsteinKde => "kde",
        }
    }
}

/// Parameters an estimate was produced with.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateMetadata {
    pub epsilon: Option<f64>,
    /// Laplace scale of the injected noise.
    pub noise_scale: Option<f64>,
    pub sensitivity: Option<f64>,
    pub bandwidth: Option<f64>,
    pub lattice: Option<usize>,
    pub bernstein_order: Option<usize>,
    /// Cells per axis of the sampling lattice (continuous estimates).
    pub sampling_grid: Option<usize>,
    /// Number of cells or bins whose value was clamped to zero.
    pub clamped: usize,
    /// Every value clamped to zero, so the estimate fell back to uniform.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    kind: ReferenceKind,
    density: DiscreteDensity,
    metadata: EstimateMetadata,
}

impl ReferenceDistribution {
    pub(crate) fn new(kind: ReferenceKind, density: DiscreteDensity, metadata: EstimateMetadata) -> Self {
        Self {
            kind,
            density,
            metadata,
        }
    }

    /// Wraps an arbitrary discrete density as a reference distribution.
    pub fn from_density(kind: ReferenceKind, density: DiscreteDensity) -> Self {
        Self::new(kind, density, EstimateMetadata::default())
    }

    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    pub fn density(&self) -> &DiscreteDensity {
        &self.density
    }

    pub fn metadata(&self) -> &EstimateMetadata {
        &self.metadata
    }

    pub fn domain(&self) -> &DomainSpec {
        self.density.domain()
    }

    fn cells_per_axis(&self) -> Option<usize> {
        match self.domain() {
            DomainSpec::Continuous { .. } => self.metadata.sampling_grid,
            DomainSpec::Discrete { .. } => None,
        }
    }

    /// Probability mass at a discrete point, or density value (mass per unit
    /// volume) at a continuous one.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let domain = *self.domain();
        if !domain.contains(x) {
            return 0.0;
        }
        match self.cells_per_axis() {
            Some(g) => {
                let idx = x
                    .iter()
                    .fold(0usize, |acc, &v| acc * g + ((v * g as f64).floor() as usize).min(g - 1));
                self.density.weights()[idx] * (g as f64).powi(domain.dim() as i32)
            }
            None => self
                .density
                .points()
                .zip(self.density.weights())
                .find(|(p, _)| *p == x)
                .map_or(0.0, |(_, w)| *w),
        }
    }

    /// `count` i.i.d. draws.
    pub fn sample(&self, count: usize, rng: &mut SeededRng) -> Result<Dataset> {
        let mut data = crate::density::sample_density(&self.density, count, rng)?;
        if let Some(g) = self.cells_per_axis() {
            let half = 0.5 / g as f64;
            let width = 1.0 / g as f64;
            let jittered: Vec<f64> = data
                .values()
                .iter()
                .map(|&center| (center - half + rng.unit() * width).clamp(0.0, 1.0))
                .collect();
            data = Dataset::new_unchecked(*data.domain(), jittered);
        }
        Ok(data)
    }
}

/// Uniform weights on every point of a discrete domain.
pub fn uniform_reference(domain: &DomainSpec) -> Result<ReferenceDistribution> {
    Ok(ReferenceDistribution::new(
        ReferenceKind::Uniform,
        DiscreteDensity::uniform(*domain)?,
        EstimateMetadata::default(),
    ))
}
