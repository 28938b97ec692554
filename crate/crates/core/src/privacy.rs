use crate::error::{Error, Result};

/// Privacy spent by a two-stage pipeline under basic composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    epsilon_estimation: f64,
    epsilon_generation: f64,
}

impl PrivacyBudget {
    /// `estimation = 0` means the reference distribution is data
    /// independent (uniform) and costs nothing.
    pub fn new(epsilon_estimation: f64, epsilon_generation: f64) -> Result<Self> {
        if !(epsilon_estimation >= 0.0 && epsilon_estimation.is_finite()) {
            return Err(Error::NonpositiveEpsilon(epsilon_estimation));
        }
        if !(epsilon_generation > 0.0 && epsilon_generation.is_finite()) {
            return Err(Error::NonpositiveEpsilon(epsilon_generation));
        }
        Ok(Self {
            epsilon_estimation,
            epsilon_generation,
        })
    }

    /// The same ε spent once on estimation and once on generation.
    pub fn split_equally(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, epsilon)
    }

    pub fn generation_only(epsilon: f64) -> Result<Self> {
        Self::new(0.0, epsilon)
    }

    pub fn epsilon_estimation(&self) -> f64 {
        self.epsilon_estimation
    }

    pub fn epsilon_generation(&self) -> f64 {
        self.epsilon_generation
    }

    pub fn epsilon_total(&self) -> f64 {
        self.epsilon_estimation + self.epsilon_generation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_is_exact_sum() {
        let b = PrivacyBudget::split_equally(0.2).unwrap();
        assert_eq!(b.epsilon_total(), 0.2 + 0.2);
        assert_eq!(PrivacyBudget::generation_only(0.7).unwrap().epsilon_total(), 0.7);
        assert!(PrivacyBudget::new(0.1, 0.0).is_err());
        assert!(PrivacyBudget::new(-0.1, 1.0).is_err());
    }
}
