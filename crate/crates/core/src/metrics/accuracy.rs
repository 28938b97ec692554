use crate::dataset::Dataset;
use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::query::{empirical_average, weighted_average, QueryFamily};

/// Per-query gaps between two sets of averages.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub worst_function: String,
    pub worst_gap: f64,
    pub per_function_gaps: Vec<(String, f64)>,
}

impl AccuracyReport {
    fn from_averages(family: &QueryFamily, left: &[f64], right: &[f64]) -> Self {
        let per_function_gaps: Vec<(String, f64)> = family
            .iter()
            .zip(left.iter().zip(right))
            .map(|(f, (a, b))| (f.name.clone(), (a - b).abs()))
            .collect();
        let (worst_function, worst_gap) = per_function_gaps
            .iter()
            .fold((String::new(), 0.0), |best, (name, gap)| {
                if *gap > best.1 || best.0.is_empty() {
                    (name.clone(), *gap)
                } else {
                    best
                }
            });
        Self {
            worst_function,
            worst_gap,
            per_function_gaps,
        }
    }

    /// `max_gap <= delta`.
    pub fn is_accurate(&self, delta: f64) -> bool {
        self.worst_gap <= delta
    }
}

/// `max_f |(1/k) Σ f(y_j) - (1/n) Σ f(x_i)|`.
pub fn accuracy(family: &QueryFamily, original: &Dataset, synthetic: &Dataset) -> Result<AccuracyReport> {
    if original.domain() != synthetic.domain() {
        return Err(Error::DomainMismatch(
            "original and synthetic data live on different domains".into(),
        ));
    }
    let left = empirical_average(family, synthetic)?;
    let right = empirical_average(family, original)?;
    Ok(AccuracyReport::from_averages(family, &left, &right))
}

/// Same metric with the synthetic side replaced by exact expectations
/// under `density`.
pub fn accuracy_against_density(
    family: &QueryFamily,
    original: &Dataset,
    density: &DiscreteDensity,
) -> Result<AccuracyReport> {
    family.check_domain(density.domain())?;
    let left = weighted_average(family, density.support(), density.weights());
    let right = empirical_average(family, original)?;
    Ok(AccuracyReport::from_averages(family, &left, &right))
}
