//! Experiment configuration files.
//!
//! The format is TOML restricted to flat `key = value` pairs inside the
//! sections below; unknown sections or keys are rejected.

use std::path::{Path, PathBuf};

use dpsynth_core::metrics::{BoundConstants, DensityExtremes, Regime};
use dpsynth_core::DomainKind;
use serde::Deserialize;

use crate::error::{BenchError, Result};

pub const THEOREM_MIN: &str = "theorem-min";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSpec {
    Fixed(usize),
    TheoremMin,
}

impl SizeSpec {
    pub fn parse(text: &str) -> Result<Self> {
        if text == THEOREM_MIN {
            return Ok(SizeSpec::TheoremMin);
        }
        match text.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(SizeSpec::Fixed(v)),
            _ => Err(BenchError::config(format!(
                "size must be a positive integer or \"{THEOREM_MIN}\", got {text:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TruthSpec {
    Uniform,
    /// Probabilities over the domain points in enumeration order.
    Weights(Vec<f64>),
    /// Rows of a CSV dataset; ν is their empirical distribution.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeSettings {
    pub lattice: usize,
    pub order: usize,
    pub sampling_grid: Option<usize>,
    /// `None` means `C′(ln n / n)^{1/p}`.
    pub bandwidth: Option<f64>,
}

impl Default for KdeSettings {
    fn default() -> Self {
        KdeSettings {
            lattice: 16,
            order: 2,
            sampling_grid: None,
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: DomainKind,
    pub levels: usize,
    pub dims: Vec<usize>,
    pub truth: TruthSpec,
    pub degree: usize,
    pub grid: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n: SizeSpec,
    pub m: SizeSpec,
    pub k: SizeSpec,
    pub constants: BoundConstants,
    pub kde: KdeSettings,
    pub extremes: Option<DensityExtremes>,
    pub regimes: Vec<Regime>,
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub threads: usize,
    pub dump_data: bool,
    pub max_support: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    domain: RawDomain,
    #[serde(default)]
    truth: RawTruth,
    #[serde(default)]
    family: RawFamily,
    privacy: RawPrivacy,
    #[serde(default)]
    sizes: RawSizes,
    #[serde(default)]
    constants: RawConstants,
    #[serde(default)]
    kde: RawKde,
    #[serde(default)]
    extremes: RawExtremes,
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: String,
    levels: Option<usize>,
    dims: Vec<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    kind: Option<String>,
    weights: Option<Vec<f64>>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    degree: Option<usize>,
    grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrivacy {
    epsilon: f64,
    delta: f64,
    gamma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSize {
    Count(i64),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSizes {
    n: Option<RawSize>,
    m: Option<RawSize>,
    k: Option<RawSize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    c1: Option<f64>,
    c2: Option<f64>,
    c1_prime: Option<f64>,
    c0: Option<f64>,
    c_prime: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKde {
    lattice: Option<usize>,
    order: Option<usize>,
    sampling_grid: Option<usize>,
    bandwidth: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtremes {
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    tau: Option<f64>,
    lipschitz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    regimes: Vec<String>,
    trials: Option<i64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    dump_data: Option<bool>,
    max_support: Option<usize>,
}

pub fn parse_regime(name: &str) -> Result<Regime> {
    match name {
        "uniform" => Ok(Regime::UniformRef),
        "histogram" => Ok(Regime::HistogramRef),
        "kde" => Ok(Regime::KdeRef),
        other => Err(BenchError::config(format!(
            "unknown regime {other:?} (expected uniform, histogram or kde)"
        ))),
    }
}

fn size(raw: Option<RawSize>, name: &str) -> Result<SizeSpec> {
    match raw {
        None => Ok(SizeSpec::TheoremMin),
        Some(RawSize::Count(v)) if v >= 1 => Ok(SizeSpec::Fixed(v as usize)),
        Some(RawSize::Count(v)) => Err(BenchError::config(format!("sizes.{name} must be positive, got {v}"))),
        Some(RawSize::Keyword(s)) => SizeSpec::parse(&s).map_err(|_| {
            BenchError::config(format!(
                "sizes.{name} must be a positive integer or \"{THEOREM_MIN}\", got {s:?}"
            ))
        }),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: Raw = toml::from_str(text).map_err(|e| BenchError::config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: Raw) -> Result<Self> {
        let kind = match raw.domain.kind.as_str() {
            "discrete" => DomainKind::Discrete,
            "continuous" => DomainKind::Continuous,
            other => {
                return Err(BenchError::config(format!(
                    "domain.kind must be \"discrete\" or \"continuous\", got {other:?}"
                )))
            }
        };
        let levels = match (kind, raw.domain.levels) {
            (DomainKind::Discrete, Some(t)) if t >= 2 => t,
            (DomainKind::Discrete, None) => 2,
            (DomainKind::Discrete, Some(t)) => {
                return Err(BenchError::config(format!("domain.levels must be at least 2, got {t}")))
            }
            (DomainKind::Continuous, Some(_)) => {
                return Err(BenchError::config("domain.levels is only valid for discrete domains"))
            }
            (DomainKind::Continuous, None) => 0,
        };
        let dims = raw.domain.dims;
        if dims.is_empty() || dims.contains(&0) {
            return Err(BenchError::config(
                "domain.dims must be a nonempty list of positive integers",
            ));
        }

        let truth = match raw.truth.kind.as_deref().unwrap_or("uniform") {
            "uniform" => TruthSpec::Uniform,
            "weights" => {
                if kind == DomainKind::Continuous {
                    return Err(BenchError::config("truth.kind = \"weights\" needs a discrete domain"));
                }
                let w = raw
                    .truth
                    .weights
                    .ok_or_else(|| BenchError::config("truth.weights is required for truth.kind = \"weights\""))?;
                if dims.len() != 1 {
                    return Err(BenchError::config(
                        "truth.weights fixes the domain, so domain.dims must have one entry",
                    ));
                }
                TruthSpec::Weights(w)
            }
            "file" => {
                let p = raw
                    .truth
                    .path
                    .ok_or_else(|| BenchError::config("truth.path is required for truth.kind = \"file\""))?;
                if dims.len() != 1 {
                    return Err(BenchError::config(
                        "truth.path fixes the domain, so domain.dims must have one entry",
                    ));
                }
                TruthSpec::File(p)
            }
            other => {
                return Err(BenchError::config(format!(
                    "truth.kind must be uniform, weights or file, got {other:?}"
                )))
            }
        };

        let p = raw.privacy;
        if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
            return Err(BenchError::config(format!(
                "privacy.epsilon must be positive, got {}",
                p.epsilon
            )));
        }
        if !(p.delta > 0.0 && p.delta <= 0.5) {
            return Err(BenchError::config(format!(
                "privacy.delta must lie in (0, 0.5], got {}",
                p.delta
            )));
        }
        if !(p.gamma > 0.0 && p.gamma <= 0.25) {
            return Err(BenchError::config(format!(
                "privacy.gamma must lie in (0, 0.25], got {}",
                p.gamma
            )));
        }

        let defaults = BoundConstants::default();
        let c = raw.constants;
        let constants = BoundConstants {
            c1: c.c1.unwrap_or(defaults.c1),
            c2: c.c2.unwrap_or(defaults.c2),
            c1_prime: c.c1_prime.unwrap_or(defaults.c1_prime),
            c0: c.c0.unwrap_or(defaults.c0),
            c_prime: c.c_prime.unwrap_or(defaults.c_prime),
        };

        let kde_defaults = KdeSettings::default();
        let kde = KdeSettings {
            lattice: raw.kde.lattice.unwrap_or(kde_defaults.lattice),
            order: raw.kde.order.unwrap_or(kde_defaults.order),
            sampling_grid: raw.kde.sampling_grid,
            bandwidth: raw.kde.bandwidth,
        };
        if kde.lattice == 0 || kde.order == 0 || kde.sampling_grid == Some(0) {
            return Err(BenchError::config(
                "kde.lattice, kde.order and kde.sampling_grid must be positive",
            ));
        }
        if matches!(kde.bandwidth, Some(h) if !(h > 0.0)) {
            return Err(BenchError::config("kde.bandwidth must be positive"));
        }

        let e = raw.extremes;
        let extremes = match (e.tau_min, e.tau_max, e.tau, e.lipschitz) {
            (None, None, None, None) => None,
            (Some(tau_min), Some(tau_max), None, None) => Some(DensityExtremes::Bounds { tau_min, tau_max }),
            (None, None, Some(tau), Some(lipschitz)) => Some(DensityExtremes::Lipschitz { tau, lipschitz }),
            _ => {
                return Err(BenchError::config(
                    "extremes takes either tau_min and tau_max, or tau and lipschitz",
                ))
            }
        };

        let run = raw.run;
        let regimes = run
            .regimes
            .iter()
            .map(|r| parse_regime(r))
            .collect::<Result<Vec<_>>>()?;
        if regimes.is_empty() {
            return Err(BenchError::config("run.regimes must name at least one regime"));
        }
        for (i, r) in regimes.iter().enumerate() {
            if regimes[..i].contains(r) {
                return Err(BenchError::config(format!("regime {r} listed twice")));
            }
            let ok = match r {
                Regime::KdeRef => kind == DomainKind::Continuous,
                _ => kind == DomainKind::Discrete,
            };
            if !ok {
                return Err(BenchError::config(format!(
                    "regime {r} does not apply to a {} domain",
                    raw.domain.kind
                )));
            }
        }
        let trials = run.trials.unwrap_or(1);
        if trials < 1 {
            return Err(BenchError::config(format!(
                "run.trials must be at least 1, got {trials}"
            )));
        }

        Ok(ExperimentConfig {
            kind,
            levels,
            dims,
            truth,
            degree: raw.family.degree.unwrap_or(2),
            grid: raw.family.grid.unwrap_or(dpsynth_core::query::DEFAULT_BOX_GRID),
            epsilon: p.epsilon,
            delta: p.delta,
            gamma: p.gamma,
            n: size(raw.sizes.n, "n")?,
            m: size(raw.sizes.m, "m")?,
            k: size(raw.sizes.k, "k")?,
            constants,
            kde,
            extremes,
            regimes,
            trials: trials as usize,
            seed: run.seed.unwrap_or(0),
            output: run.output.unwrap_or_else(|| PathBuf::from("dpsynth-out")),
            threads: run.threads.unwrap_or(0),
            dump_data: run.dump_data.unwrap_or(false),
            max_support: run.max_support.unwrap_or(1_000_000),
        })
    }
}
