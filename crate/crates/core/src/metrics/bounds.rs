use std::fmt;

use crate::domain::{DomainKind, DomainSpec};
use crate::error::{check_range, Error, Result};
use crate::noise::laplace_scale_for_generation;

/// Which reference measure μ the parameter calculator assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    UniformRef,
    HistogramRef,
    KdeRef,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::UniformRef => "uniform",
            Regime::HistogramRef => "histogram",
            Regime::KdeRef => "kde",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Assumptions on the true density ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityExtremes {
    /// `τ₁ = min ν`, `τ₂ = max ν` on a discrete domain.
    Bounds { tau_min: f64, tau_max: f64 },
    /// `τ = inf ν` and Lipschitz constant `L` on the unit cube.
    Lipschitz { tau: f64, lipschitz: f64 },
    /// ν is uniform.
    Uniform,
}

/// Absolute constants left unspecified by the bounds. All default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c1_prime: f64,
    pub c0: f64,
    /// Bandwidth constant in `h = C′(ln n / n)^{1/p}`.
    pub c_prime: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c1: 1.0,
            c2: 1.0,
            c1_prime: 1.0,
            c0: 1.0,
            c_prime: 1.0,
        }
    }
}

impl BoundConstants {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c1_prime", self.c1_prime),
            ("c0", self.c0),
            ("c_prime", self.c_prime),
        ] {
            check_range(name, v, v.is_finite() && v >= 0.0, "finite and nonnegative")?;
        }
        check_range("c_prime", self.c_prime, self.c_prime > 0.0, "positive")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRequest {
    pub regime: Regime,
    pub domain: DomainSpec,
    pub family_size: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub extremes: Option<DensityExtremes>,
    pub constants: BoundConstants,
}

impl BoundRequest {
    pub fn new(regime: Regime, domain: DomainSpec, family_size: usize, epsilon: f64, delta: f64, gamma: f64) -> Self {
        BoundRequest {
            regime,
            domain,
            family_size,
            epsilon,
            delta,
            gamma,
            extremes: None,
            constants: BoundConstants::default(),
        }
    }

    pub fn with_extremes(mut self, extremes: DensityExtremes) -> Self {
        self.extremes = Some(extremes);
        self
    }

    pub fn with_constants(mut self, constants: BoundConstants) -> Self {
        self.constants = constants;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub regime: Regime,
    /// Condition-number bound entering the `m` requirement.
    pub k_cond: f64,
    pub n_min: u64,
    pub m_min: u64,
    pub k_min: u64,
    pub sigma: f64,
    /// `h` at `n_min` for the KDE regime.
    pub bandwidth: Option<f64>,
    /// Individual lower bounds on `n`, before taking the maximum.
    pub n_terms: Vec<(&'static str, f64)>,
    pub constants: BoundConstants,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "regime,K,n_min,m_min,k_min,sigma,bandwidth,C1,C2,C1_prime,C0,C_prime";

    pub fn csv_row(&self) -> String {
        let c = &self.constants;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.regime,
            self.k_cond,
            self.n_min,
            self.m_min,
            self.k_min,
            self.sigma,
            self.bandwidth.map(|h| h.to_string()).unwrap_or_default(),
            c.c1,
            c.c2,
            c.c1_prime,
            c.c0,
            c.c_prime
        )
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime: {}", self.regime)?;
        writeln!(f, "K: {:.6}", self.k_cond)?;
        writeln!(f, "n_min: {}", self.n_min)?;
        for (name, v) in &self.n_terms {
            writeln!(f, "  {name}: {v:.3}")?;
        }
        writeln!(f, "m_min: {}", self.m_min)?;
        writeln!(f, "k_min: {}", self.k_min)?;
        writeln!(f, "sigma: {:.6}", self.sigma)?;
        if let Some(h) = self.bandwidth {
            writeln!(f, "bandwidth: {h:.6}")?;
        }
        let c = &self.constants;
        write!(
            f,
            "constants: C1={} C2={} C1'={} C0={} C'={}",
            c.c1, c.c2, c.c1_prime, c.c0, c.c_prime
        )
    }
}

// Ceiling that ignores rounding noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    c.max(1.0) as u64
}

/// Histogram-regime condition bound
/// `K(n) = (1 + C₁(√(2 ln(1/γ)/n) + √(|Ω|/n)))^{1/2}
///       · (1 + C₂ δ|Ω|(1 + τ₂|Ω|) ln|Ω| / (γ n ln(|F|/δ)))^{1/2}`.
pub fn histogram_condition_bound(
    n: f64,
    cardinality: f64,
    family_size: usize,
    delta: f64,
    gamma: f64,
    tau_max: f64,
    constants: &BoundConstants,
) -> f64 {
    let omega = cardinality;
    let first = 1.0 + constants.c1 * ((2.0 * (1.0 / gamma).ln() / n).sqrt() + (omega / n).sqrt());
    let second = 1.0
        + constants.c2 * delta * omega * (1.0 + tau_max * omega) * omega.ln()
            / (gamma * n * (family_size as f64 / delta).ln());
    (first * second).sqrt()
}

/// Minimal `(n, m, k)` and the generation noise scale for a regime.
pub fn required_parameters(req: &BoundRequest) -> Result<BoundReport> {
    let BoundRequest {
        regime,
        ref domain,
        family_size,
        epsilon,
        delta,
        gamma,
        extremes,
        constants,
    } = *req;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::NonpositiveEpsilon(epsilon));
    }
    constants.validate()?;
    let sigma = laplace_scale_for_generation(delta, family_size, gamma)?.get();
    let f = family_size as f64;
    let log_f_gamma = (f / gamma).ln();
    let privacy = 2.0 * f / (epsilon * delta) * log_f_gamma;
    let accuracy = log_f_gamma / (delta * delta);
    let k_min = ceil_count(accuracy);
    let mut n_terms = vec![("privacy", privacy), ("accuracy", accuracy)];
    let m_scale = f / (delta * delta * gamma);

    let (k_cond, m_raw, bandwidth) = match regime {
        Regime::UniformRef => {
            if domain.kind() != DomainKind::Discrete {
                return Err(Error::ContinuousDomain);
            }
            let omega = domain.cardinality().unwrap_or(u128::MAX) as f64;
            (omega, omega * m_scale, None)
        }
        Regime::HistogramRef => {
            if domain.kind() != DomainKind::Discrete {
                return Err(Error::ContinuousDomain);
            }
            let omega = domain.cardinality().unwrap_or(u128::MAX) as f64;
            let (tau1, tau2) = match extremes {
                None => return Err(Error::MissingExtremes("histogram regime needs tau_min and tau_max")),
                Some(DensityExtremes::Uniform) => (1.0 / omega, 1.0 / omega),
                Some(DensityExtremes::Bounds { tau_min, tau_max }) => {
                    let u = 1.0 / omega;
                    let tol = 1e-12;
                    check_range(
                        "tau_min",
                        tau_min,
                        tau_min > 0.0 && tau_min <= u * (1.0 + tol),
                        "in (0, 1/|Omega|]",
                    )?;
                    check_range(
                        "tau_max",
                        tau_max,
                        tau_max >= u * (1.0 - tol) && tau_max <= 1.0,
                        "in [1/|Omega|, 1]",
                    )?;
                    (tau_min, tau_max)
                }
                Some(DensityExtremes::Lipschitz { .. }) => {
                    return Err(Error::MissingExtremes("histogram regime needs tau_min and tau_max"))
                }
            };
            let min_mass = 8.0 / (tau1 * tau1) * (omega + 2.0 * (1.0 / gamma).ln());
            let deviation = 8.0 * delta * omega * (1.0 + tau2 * omega) * omega.ln() / (tau1 * gamma * (f / delta).ln());
            n_terms.push(("min_mass", min_mass));
            n_terms.push(("deviation", deviation));
            let n = n_terms.iter().map(|t| t.1).fold(0.0, f64::max);
            let k = histogram_condition_bound(ceil_count(n) as f64, omega, family_size, delta, gamma, tau2, &constants);
            (k, 2.0 * k * m_scale, None)
        }
        Regime::KdeRef => {
            if domain.kind() != DomainKind::Continuous {
                return Err(Error::DiscreteDomain);
            }
            let p = domain.dim() as f64;
            let tau = match extremes {
                None | Some(DensityExtremes::Bounds { .. }) => {
                    return Err(Error::MissingExtremes("kde regime needs tau and a Lipschitz constant"))
                }
                Some(DensityExtremes::Uniform) => 1.0,
                Some(DensityExtremes::Lipschitz { tau, lipschitz }) => {
                    check_range("tau", tau, tau > 0.0 && tau <= 1.0, "in (0, 1]")?;
                    check_range(
                        "lipschitz",
                        lipschitz,
                        lipschitz >= 0.0 && lipschitz.is_finite(),
                        "finite and nonnegative",
                    )?;
                    tau
                }
            };
            let deviation = (3.0 / tau).powf(p + 1.0)
                * (2.0 / (epsilon * (2.0 * std::f64::consts::PI).powf(p / 2.0)))
                * (1.0 / gamma).ln();
            n_terms.push(("deviation", deviation));
            let (k, m) = match extremes {
                Some(DensityExtremes::Uniform) => (constants.c0, constants.c0 * m_scale),
                _ => {
                    let k = 1.0 + constants.c1_prime * tau;
                    (k, 2.0 * k * m_scale)
                }
            };
            let n = ceil_count(n_terms.iter().map(|t| t.1).fold(0.0, f64::max)).max(2) as f64;
            let h = constants.c_prime * (n.ln() / n).powf(1.0 / p);
            (k, m, Some(h))
        }
    };

    let n_min = ceil_count(n_terms.iter().map(|t| t.1).fold(0.0, f64::max));
    Ok(BoundReport {
        regime,
        k_cond,
        n_min,
        m_min: ceil_count(m_raw),
        k_min,
        sigma,
        bandwidth,
        n_terms,
        constants,
    })
}
