//! Seeded trial sweeps over dimensions and reference regimes.

use std::time::Instant;

use dpsynth_core::estimators::{
    bernstein_mechanism, default_bandwidth, perturbed_histogram, uniform_reference, KdeConfig, ReferenceDistribution,
};
use dpsynth_core::fitting::{generate, GenerationParams};
use dpsynth_core::metrics::{required_parameters, BoundReport, BoundRequest, DensityExtremes, Regime};
use dpsynth_core::query::build_marginal_family_with_grid;
use dpsynth_core::{
    sample_density, Dataset, DiscreteDensity, DomainKind, DomainSpec, PrivacyBudget, QueryFamily, SeededRng,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SizeSpec, TruthSpec};
use crate::error::{error_code, BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub regime: Regime,
    pub p: usize,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub epsilon_total: f64,
    pub sigma: f64,
    pub accuracy: Option<f64>,
    pub lp_objective: Option<f64>,
    pub lp_iterations: Option<usize>,
    pub estimate_ms: f64,
    pub sample_support_ms: f64,
    pub solve_ms: f64,
    pub sample_synthetic_ms: f64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn total_ms(&self) -> f64 {
        self.estimate_ms + self.sample_support_ms + self.solve_ms + self.sample_synthetic_ms
    }
}

/// A record together with the data it was computed from, kept only when
/// the configuration asks for data dumps.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub original: Option<Dataset>,
    pub synthetic: Option<Dataset>,
}

/// Ground truth ν for one dimension.
#[derive(Debug, Clone)]
pub enum Truth {
    Discrete(DiscreteDensity),
    /// Uniform on the unit cube.
    UniformCube(DomainSpec),
    /// Resampling the rows of a continuous dataset.
    Rows(Dataset),
}

impl Truth {
    pub fn sample(&self, n: usize, rng: &mut SeededRng) -> Result<Dataset> {
        Ok(match self {
            Truth::Discrete(d) => sample_density(d, n, rng)?,
            Truth::UniformCube(domain) => {
                let values = (0..n * domain.dim()).map(|_| rng.unit()).collect();
                Dataset::new(*domain, values)?
            }
            Truth::Rows(rows) => {
                let mut values = Vec::with_capacity(n * rows.dim());
                for _ in 0..n {
                    let i = ((rng.unit() * rows.len() as f64) as usize).min(rows.len() - 1);
                    values.extend_from_slice(rows.row(i));
                }
                Dataset::new(*rows.domain(), values)?
            }
        })
    }

    /// Density extremes implied by ν, when they are known.
    fn extremes(&self, regime: Regime) -> Option<DensityExtremes> {
        match (self, regime) {
            (Truth::UniformCube(_), _) => Some(DensityExtremes::Uniform),
            (Truth::Discrete(d), Regime::HistogramRef | Regime::UniformRef) => {
                let w = d.weights();
                let uniform = w.iter().all(|&v| v == w[0]);
                if uniform {
                    Some(DensityExtremes::Uniform)
                } else {
                    Some(DensityExtremes::Bounds {
                        tau_min: w.iter().copied().fold(f64::INFINITY, f64::min),
                        tau_max: w.iter().copied().fold(0.0, f64::max),
                    })
                }
            }
            _ => None,
        }
    }
}

/// Everything a trial needs for one (dimension, regime) cell.
#[derive(Debug, Clone)]
pub struct PlanCell {
    pub p: usize,
    pub regime: Regime,
    pub domain: DomainSpec,
    pub family: QueryFamily,
    pub truth: Truth,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub bounds: Option<BoundReport>,
}

fn truth_for(config: &ExperimentConfig, domain: DomainSpec) -> Result<Truth> {
    Ok(match (&config.truth, domain.kind()) {
        (TruthSpec::Uniform, DomainKind::Discrete) => Truth::Discrete(DiscreteDensity::uniform(domain)?),
        (TruthSpec::Uniform, DomainKind::Continuous) => Truth::UniformCube(domain),
        (TruthSpec::Weights(w), _) => Truth::Discrete(
            DiscreteDensity::over_domain(domain, w.clone())
                .map_err(|e| BenchError::config(format!("truth.weights: {e}")))?,
        ),
        (TruthSpec::File(path), kind) => {
            let data = Dataset::load_csv(domain, path)
                .map_err(|e| BenchError::config(format!("truth.path {}: {e}", path.display())))?;
            if data.is_empty() {
                return Err(BenchError::config("truth.path holds no rows"));
            }
            match kind {
                DomainKind::Discrete => Truth::Discrete(DiscreteDensity::empirical(&data)?),
                DomainKind::Continuous => Truth::Rows(data),
            }
        }
    })
}

/// Stable per-regime index used to derive random streams.
fn regime_index(regime: Regime) -> u64 {
    match regime {
        Regime::UniformRef => 0,
        Regime::HistogramRef => 1,
        Regime::KdeRef => 2,
    }
}

/// Resolves sizes (including "theorem-min") for every dimension and regime.
pub fn plan(config: &ExperimentConfig) -> Result<Vec<PlanCell>> {
    let mut cells = Vec::new();
    for &p in &config.dims {
        let domain = match config.kind {
            DomainKind::Discrete => DomainSpec::discrete(p, config.levels),
            DomainKind::Continuous => DomainSpec::continuous(p),
        }
        .map_err(|e| BenchError::config(e.to_string()))?;
        let family = build_marginal_family_with_grid(&domain, config.degree, config.grid)
            .map_err(|e| BenchError::config(format!("family: {e}")))?;
        let truth = truth_for(config, domain)?;
        for &regime in &config.regimes {
            let needs_bounds = [config.n, config.m, config.k].contains(&SizeSpec::TheoremMin);
            let bounds = if needs_bounds {
                let extremes = config.extremes.or_else(|| truth.extremes(regime));
                let mut req =
                    BoundRequest::new(regime, domain, family.len(), config.epsilon, config.delta, config.gamma)
                        .with_constants(config.constants);
                req.extremes = extremes;
                Some(required_parameters(&req).map_err(|e| BenchError::config(format!("p={p}, {regime}: {e}")))?)
            } else {
                None
            };
            let resolve = |spec: SizeSpec, pick: fn(&BoundReport) -> u64| -> usize {
                match spec {
                    SizeSpec::Fixed(v) => v,
                    SizeSpec::TheoremMin => pick(bounds.as_ref().expect("bounds resolved")) as usize,
                }
            };
            let n = resolve(config.n, |b| b.n_min);
            let m = resolve(config.m, |b| b.m_min);
            let k = resolve(config.k, |b| b.k_min);
            if m > config.max_support {
                return Err(BenchError::config(format!(
                    "p={p}, {regime}: resolved m = {m} exceeds run.max_support = {}",
                    config.max_support
                )));
            }
            if regime == Regime::KdeRef && n < 2 {
                return Err(BenchError::config("the kde regime needs n of at least 2"));
            }
            cells.push(PlanCell {
                p,
                regime,
                domain,
                family: family.clone(),
                truth: truth.clone(),
                n,
                m,
                k,
                bounds,
            });
        }
    }
    Ok(cells)
}

fn estimate(
    cell: &PlanCell,
    config: &ExperimentConfig,
    data: &Dataset,
    rng: &mut SeededRng,
) -> Result<(ReferenceDistribution, PrivacyBudget)> {
    let eps = config.epsilon;
    Ok(match cell.regime {
        Regime::UniformRef => (uniform_reference(&cell.domain)?, PrivacyBudget::generation_only(eps)?),
        Regime::HistogramRef => (perturbed_histogram(data, eps, rng)?, PrivacyBudget::split_equally(eps)?),
        Regime::KdeRef => {
            let h = match config.kde.bandwidth {
                Some(h) => h,
                None => default_bandwidth(data.len(), cell.p, config.constants.c_prime)?,
            };
            let mut kde = KdeConfig::new(h, config.kde.lattice, config.kde.order, eps);
            if let Some(g) = config.kde.sampling_grid {
                kde = kde.with_sampling_grid(g);
            }
            (
                bernstein_mechanism(data, &kde, rng)?,
                PrivacyBudget::split_equally(eps)?,
            )
        }
    })
}

fn run_trial(cell: &PlanCell, config: &ExperimentConfig, trial: usize) -> TrialOutcome {
    let seed = config.seed.wrapping_add(trial as u64);
    let base_stream = (cell.p as u64) << 8;
    let mut record = TrialRecord {
        regime: cell.regime,
        p: cell.p,
        trial,
        seed,
        n: cell.n,
        m: cell.m,
        k: cell.k,
        epsilon_total: match cell.regime {
            Regime::UniformRef => config.epsilon,
            _ => 2.0 * config.epsilon,
        },
        sigma: config.delta / (cell.family.len() as f64 / config.gamma).ln(),
        accuracy: None,
        lp_objective: None,
        lp_iterations: None,
        estimate_ms: 0.0,
        sample_support_ms: 0.0,
        solve_ms: 0.0,
        sample_synthetic_ms: 0.0,
        error: None,
    };
    // X depends on (seed, p, trial) only, so regimes with equal n share it.
    let mut data_rng = SeededRng::with_stream(seed, base_stream);
    let data = match cell.truth.sample(cell.n, &mut data_rng) {
        Ok(d) => d,
        Err(e) => {
            record.error = Some(bench_code(&e).into());
            return TrialOutcome {
                record,
                original: None,
                synthetic: None,
            };
        }
    };
    let stage = base_stream + 1 + 2 * regime_index(cell.regime);
    let mut est_rng = SeededRng::with_stream(seed, stage);
    let mut gen_rng = SeededRng::with_stream(seed, stage + 1);

    let t = Instant::now();
    let estimated = estimate(cell, config, &data, &mut est_rng);
    record.estimate_ms = t.elapsed().as_secs_f64() * 1e3;
    let outcome = estimated.and_then(|(mu, budget)| {
        let params = GenerationParams {
            m: cell.m,
            k: cell.k,
            delta: config.delta,
            gamma: config.gamma,
        };
        Ok(generate(&data, &cell.family, &mu, params, budget, &mut gen_rng)?)
    });
    let synthetic = match outcome {
        Ok(out) => {
            record.accuracy = Some(out.record.accuracy.worst_gap);
            record.lp_objective = Some(out.fit.objective);
            record.lp_iterations = Some(out.fit.stats.iterations);
            record.epsilon_total = out.record.epsilon_total;
            record.sigma = out.record.sigma;
            record.sample_support_ms = out.record.timings.sample_support_ms;
            record.solve_ms = out.record.timings.solve_ms;
            record.sample_synthetic_ms = out.record.timings.sample_synthetic_ms;
            Some(out.synthetic)
        }
        Err(e) => {
            record.error = Some(bench_code(&e).into());
            None
        }
    };
    TrialOutcome {
        record,
        original: config.dump_data.then_some(data),
        synthetic: if config.dump_data { synthetic } else { None },
    }
}

fn bench_code(err: &BenchError) -> &'static str {
    match err {
        BenchError::Core(e) => error_code(e),
        BenchError::Config(_) => "Config",
        BenchError::Io(_) => "Io",
        BenchError::Csv(_) => "Csv",
    }
}

/// Runs every trial of every plan cell; output order is dimension, then
/// regime (config order), then trial index, regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    let cells = plan(config)?;
    let jobs: Vec<(&PlanCell, usize)> = cells
        .iter()
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| BenchError::config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(c, t)| run_trial(c, config, t)).collect()))
}
