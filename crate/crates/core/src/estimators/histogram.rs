use super::{EstimateMetadata, ReferenceDistribution, ReferenceKind};
use crate::dataset::Dataset;
use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::noise::{sample_laplace, LaplaceScale};
use crate::rng::SeededRng;

/// Per-point counts over the lexicographic enumeration of a discrete domain.
pub fn histogram_counts(data: &Dataset) -> Result<Vec<f64>> {
    let domain = data.domain();
    if domain.levels().is_none() {
        return Err(Error::ContinuousDomain);
    }
    let bins = domain.checked_cardinality(crate::domain::DEFAULT_ENUMERATION_CAP)?;
    let mut counts = vec![0.0; bins];
    for row in data.rows() {
        counts[domain.index_of(row).expect("rows lie in the domain")] += 1.0;
    }
    Ok(counts)
}

/// Perturbed histogram with one bin per domain point: counts plus
/// `Lap(2/ε)`, clamped at zero and renormalised.
pub fn perturbed_histogram(data: &Dataset, epsilon: f64, rng: &mut SeededRng) -> Result<ReferenceDistribution> {
    let scale = LaplaceScale::for_histogram(epsilon)?;
    let bins = data
        .domain()
        .checked_cardinality(crate::domain::DEFAULT_ENUMERATION_CAP)?;
    let noise = sample_laplace(scale, bins, rng);
    let mut estimate = perturbed_histogram_with_noise(data, &noise)?;
    estimate.metadata.epsilon = Some(epsilon);
    estimate.metadata.noise_scale = Some(scale.get());
    Ok(estimate)
}

/// The histogram estimate for explicitly supplied per-bin noise.
///
/// If every perturbed count clamps to zero the estimate is uniform and
/// `metadata.degenerate` is set.
pub fn perturbed_histogram_with_noise(data: &Dataset, noise: &[f64]) -> Result<ReferenceDistribution> {
    let counts = histogram_counts(data)?;
    if noise.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            left: noise.len(),
            right: counts.len(),
        });
    }
    let domain = *data.domain();
    let mut clamped = 0;
    let masses: Vec<f64> = counts
        .iter()
        .zip(noise)
        .map(|(c, w)| {
            let d = c + w;
            if d <= 0.0 {
                clamped += 1;
                0.0
            } else {
                d
            }
        })
        .collect();
    let degenerate = clamped == masses.len();
    let density = if degenerate {
        DiscreteDensity::uniform(domain)?
    } else {
        DiscreteDensity::from_masses(domain, domain.enumerate()?, masses)?
    };
    Ok(ReferenceDistribution::new(
        ReferenceKind::PerturbedHistogram,
        density,
        EstimateMetadata {
            clamped,
            degenerate,
            ..EstimateMetadata::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    fn coin(rows: &[f64]) -> Dataset {
        Dataset::new(DomainSpec::boolean(1).unwrap(), rows.to_vec()).unwrap()
    }

    #[test]
    fn fixed_noise_examples() {
        // C = (3, 1), ω = (1, 0) → D = (4, 1)
        let data = coin(&[0.0, 0.0, 0.0, 1.0]);
        let mu = perturbed_histogram_with_noise(&data, &[1.0, 0.0]).unwrap();
        let w = mu.density().weights();
        assert!((w[0] - 0.8).abs() < 1e-15 && (w[1] - 0.2).abs() < 1e-15);
        // C = (1, 2), ω = (-5, 0) → D = (0, 2)
        let data = coin(&[0.0, 1.0, 1.0]);
        let mu = perturbed_histogram_with_noise(&data, &[-5.0, 0.0]).unwrap();
        assert_eq!(mu.density().weights(), &[0.0, 1.0]);
        assert_eq!(mu.metadata().clamped, 1);
        assert!(!mu.metadata().degenerate);
    }

    #[test]
    fn zero_noise_is_empirical() {
        let d = DomainSpec::discrete(2, 3).unwrap();
        let data = Dataset::from_rows(d, &[vec![0.0, 1.0], vec![2.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let mu = perturbed_histogram_with_noise(&data, &[0.0; 9]).unwrap();
        let empirical = DiscreteDensity::empirical(&data).unwrap();
        assert_eq!(mu.density(), &empirical);
    }

    #[test]
    fn all_clamped_falls_back_to_uniform() {
        let data = coin(&[0.0, 1.0]);
        let mu = perturbed_histogram_with_noise(&data, &[-3.0, -1.0]).unwrap();
        assert!(mu.metadata().degenerate);
        assert_eq!(mu.density().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn errors() {
        let c = Dataset::new(DomainSpec::continuous(1).unwrap(), vec![0.3]).unwrap();
        assert!(matches!(
            perturbed_histogram(&c, 1.0, &mut SeededRng::new(0)),
            Err(Error::ContinuousDomain)
        ));
        let data = coin(&[0.0]);
        assert!(matches!(
            perturbed_histogram(&data, 0.0, &mut SeededRng::new(0)),
            Err(Error::NonpositiveEpsilon(_))
        ));
        assert!(perturbed_histogram_with_noise(&data, &[0.0]).is_err());
    }

    #[test]
    fn valid_density_for_many_seeds() {
        let d = DomainSpec::boolean(3).unwrap();
        let data = Dataset::from_rows(d, &[vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        for seed in 0..200 {
            let mu = perturbed_histogram(&data, 0.5, &mut SeededRng::new(seed)).unwrap();
            let w = mu.density().weights();
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(mu.metadata().noise_scale, Some(4.0));
        }
    }
}
