//! Sample spaces: the discrete grid `{0..t-1}^p` and the unit cube `[0,1]^p`.

use crate::error::{Error, Result};

/// Default upper bound on the number of points [`DomainSpec::enumerate`] will
/// materialise.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainSpec {
    /// `{0, 1, ..., levels-1}^dim`.
    Discrete { dim: usize, levels: usize },
    /// `[0, 1]^dim`.
    Continuous { dim: usize },
}

impl DomainSpec {
    pub fn discrete(dim: usize, levels: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if levels < 2 {
            return Err(Error::InvalidDomain(format!(
                "need at least 2 levels per coordinate, got {levels}"
            )));
        }
        Ok(Self::Discrete { dim, levels })
    }

    pub fn boolean(dim: usize) -> Result<Self> {
        Self::discrete(dim, 2)
    }

    pub fn continuous(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        Ok(Self::Continuous { dim })
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            Self::Discrete { .. } => DomainKind::Discrete,
            Self::Continuous { .. } => DomainKind::Continuous,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Discrete { dim, .. } | Self::Continuous { dim } => dim,
        }
    }

    /// Levels per coordinate; `None` for continuous domains.
    pub fn levels(&self) -> Option<usize> {
        match *self {
            Self::Discrete { levels, .. } => Some(levels),
            Self::Continuous { .. } => None,
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.levels() == Some(2)
    }

    /// `t^p` as an exact integer; `None` for continuous domains.
    pub fn cardinality(&self) -> Option<u128> {
        match *self {
            Self::Discrete { dim, levels } => {
                let mut total: u128 = 1;
                for _ in 0..dim {
                    total = total.saturating_mul(levels as u128);
                }
                Some(total)
            }
            Self::Continuous { .. } => None,
        }
    }

    /// Cardinality checked against `cap`.
    pub fn checked_cardinality(&self, cap: usize) -> Result<usize> {
        let size = self.cardinality().ok_or(Error::ContinuousDomain)?;
        if size > cap as u128 {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(size as usize)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        if point.len() != self.dim() {
            return false;
        }
        match *self {
            Self::Discrete { levels, .. } => point.iter().all(|&x| x >= 0.0 && x.fract() == 0.0 && x < levels as f64),
            Self::Continuous { .. } => point.iter().all(|&x| (0.0..=1.0).contains(&x)),
        }
    }

    /// All points of a discrete domain in lexicographic order, flattened
    /// row-major (`dim` coordinates per point).
    pub fn enumerate(&self) -> Result<Vec<f64>> {
        self.enumerate_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_capped(&self, cap: usize) -> Result<Vec<f64>> {
        let size = self.checked_cardinality(cap)?;
        let dim = self.dim();
        let levels = self.levels().expect("discrete");
        let mut out = Vec::with_capacity(size * dim);
        let mut digits = vec![0usize; dim];
        for _ in 0..size {
            out.extend(digits.iter().map(|&d| d as f64));
            for slot in digits.iter_mut().rev() {
                *slot += 1;
                if *slot < levels {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(out)
    }

    /// Position of a discrete point in the lexicographic enumeration.
    pub fn index_of(&self, point: &[f64]) -> Option<usize> {
        let levels = self.levels()?;
        if !self.contains(point) {
            return None;
        }
        Some(point.iter().fold(0usize, |acc, &x| acc * levels + x as usize))
    }
}
