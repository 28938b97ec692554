//! Command-line verbs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dpsynth_core::estimators::{
    bernstein_mechanism, default_bandwidth, perturbed_histogram, uniform_reference, KdeConfig, ReferenceDistribution,
};
use dpsynth_core::fitting::{build_problem, solve_minimax, GenerationParams};
use dpsynth_core::metrics::{
    accuracy, required_parameters, BoundConstants, BoundReport, BoundRequest, DensityExtremes, Regime,
};
use dpsynth_core::noise::laplace_scale_for_generation;
use dpsynth_core::query::build_marginal_family_with_grid;
use dpsynth_core::{sample_density, Dataset, DomainSpec, PrivacyBudget, SeededRng};

use crate::config::{parse_regime, ExperimentConfig, SizeSpec};
use crate::error::{BenchError, Result};
use crate::experiment::run_experiment;
use crate::report::emit_reports;

#[derive(Debug, Parser)]
#[command(
    name = "dpsynth",
    version,
    about = "Differentially private synthetic data generation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline once on a CSV dataset.
    Generate(GenerateArgs),
    /// Run an experiment sweep described by a config file.
    Bench(BenchArgs),
    /// Print the minimal sample sizes for a parameter set.
    Bounds(BoundsArgs),
    /// Estimate a reference distribution and write it as CSV.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// `discrete:T:P` for {0..T-1}^P or `continuous:P` for [0,1]^P.
    #[arg(long)]
    pub domain: String,
}

#[derive(Debug, Args)]
pub struct KdeArgs {
    /// Bernstein lattice size k.
    #[arg(long, default_value_t = 16)]
    pub lattice: usize,
    /// Iterated Bernstein order j.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// KDE bandwidth; defaults to C'(ln n / n)^(1/p).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Bandwidth constant C'.
    #[arg(long, default_value_t = 1.0)]
    pub c_prime: f64,
    /// Cells per axis of the sampling lattice.
    #[arg(long)]
    pub sampling_grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Input CSV with header x1..xp.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 2)]
    pub family_degree: usize,
    /// Box-query grid per axis on continuous domains.
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    /// uniform, histogram or kde.
    #[arg(long)]
    pub regime: String,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Reduced-support size, or "theorem-min".
    #[arg(long, default_value = "theorem-min")]
    pub m: String,
    /// Synthetic sample size, or "theorem-min".
    #[arg(long, default_value = "theorem-min")]
    pub k: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the synthetic CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the linear program in CPLEX LP format.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    #[command(flatten)]
    pub kde: KdeArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `run.output`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub regime: String,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 2)]
    pub family_degree: usize,
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Assume ν uniform.
    #[arg(long, conflicts_with_all = ["tau_min", "tau", "lipschitz"])]
    pub uniform_truth: bool,
    #[arg(long, requires = "tau_max")]
    pub tau_min: Option<f64>,
    #[arg(long, requires = "tau_min")]
    pub tau_max: Option<f64>,
    #[arg(long, requires = "lipschitz", conflicts_with = "tau_min")]
    pub tau: Option<f64>,
    #[arg(long, requires = "tau")]
    pub lipschitz: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c1_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_prime: f64,
    /// Print a CSV header and row instead of text.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    /// uniform, histogram or kde.
    #[arg(long)]
    pub regime: String,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the density CSV (coordinates, weight).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub kde: KdeArgs,
}

pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| BenchError::config(format!("bad number {s:?} in domain {text:?}")))
    };
    let domain = match parts.as_slice() {
        ["discrete", t, p] => DomainSpec::discrete(num(p)?, num(t)?),
        ["continuous", p] => DomainSpec::continuous(num(p)?),
        _ => {
            return Err(BenchError::config(format!(
                "domain must be discrete:T:P or continuous:P, got {text:?}"
            )))
        }
    };
    domain.map_err(|e| BenchError::config(e.to_string()))
}

fn load_data(path: &PathBuf, domain: DomainSpec) -> Result<Dataset> {
    let data = Dataset::load_csv(domain, path).map_err(|e| BenchError::config(format!("{}: {e}", path.display())))?;
    if data.is_empty() {
        return Err(BenchError::config(format!("{}: no data rows", path.display())));
    }
    Ok(data)
}

/// Runs as a configuration check: failures here exit with status 1.
fn validated<T>(r: dpsynth_core::Result<T>) -> Result<T> {
    r.map_err(|e| BenchError::config(e.to_string()))
}

fn estimate_reference(
    regime: Regime,
    data: &Dataset,
    epsilon: f64,
    kde: &KdeArgs,
    rng: &mut SeededRng,
) -> Result<(ReferenceDistribution, PrivacyBudget)> {
    Ok(match regime {
        Regime::UniformRef => (
            validated(uniform_reference(data.domain()))?,
            validated(PrivacyBudget::generation_only(epsilon))?,
        ),
        Regime::HistogramRef => {
            let budget = validated(PrivacyBudget::split_equally(epsilon))?;
            (validated(perturbed_histogram(data, epsilon, rng))?, budget)
        }
        Regime::KdeRef => {
            let budget = validated(PrivacyBudget::split_equally(epsilon))?;
            let h = match kde.bandwidth {
                Some(h) => h,
                None => validated(default_bandwidth(data.len(), data.dim(), kde.c_prime))?,
            };
            let mut config = KdeConfig::new(h, kde.lattice, kde.order, epsilon);
            if let Some(g) = kde.sampling_grid {
                config = config.with_sampling_grid(g);
            }
            validated(config.validate(data.dim()))?;
            (validated(bernstein_mechanism(data, &config, rng))?, budget)
        }
    })
}

fn generate_cmd(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let domain = parse_domain(&args.domain.domain)?;
    let regime = parse_regime(&args.regime)?;
    let data = load_data(&args.data, domain)?;
    let family = validated(build_marginal_family_with_grid(&domain, args.family_degree, args.grid))?;
    let (m_spec, k_spec) = (SizeSpec::parse(&args.m)?, SizeSpec::parse(&args.k)?);
    let resolved = if m_spec == SizeSpec::TheoremMin || k_spec == SizeSpec::TheoremMin {
        let req = BoundRequest::new(regime, domain, family.len(), args.epsilon, args.delta, args.gamma)
            .with_extremes(DensityExtremes::Uniform);
        Some(validated(required_parameters(&req))?)
    } else {
        None
    };
    let pick = |spec: SizeSpec, f: fn(&BoundReport) -> u64| match spec {
        SizeSpec::Fixed(v) => v,
        SizeSpec::TheoremMin => f(resolved.as_ref().expect("resolved")) as usize,
    };
    let params = GenerationParams {
        m: pick(m_spec, |b| b.m_min),
        k: pick(k_spec, |b| b.k_min),
        delta: args.delta,
        gamma: args.gamma,
    };
    let sigma = validated(laplace_scale_for_generation(args.delta, family.len(), args.gamma))?;

    let mut est_rng = SeededRng::with_stream(args.seed, 1);
    let mut gen_rng = SeededRng::with_stream(args.seed, 2);
    let t = std::time::Instant::now();
    let (mu, budget) = estimate_reference(regime, &data, args.epsilon, &args.kde, &mut est_rng)?;
    let estimate_ms = t.elapsed().as_secs_f64() * 1e3;

    // same stages as fitting::generate, kept open so the LP can be dumped
    let t = std::time::Instant::now();
    let problem = build_problem(&data, &family, &mu, params.m, sigma, &mut gen_rng)?;
    let support_ms = t.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &args.dump_lp {
        problem.write_lp(BufWriter::new(File::create(path)?))?;
    }
    let fit = solve_minimax(&problem)?;
    let t = std::time::Instant::now();
    let synthetic = sample_density(&fit.density, params.k, &mut gen_rng)?;
    let sample_ms = t.elapsed().as_secs_f64() * 1e3;
    synthetic.save_csv(&args.out)?;
    let report = accuracy(&family, &data, &synthetic)?;

    writeln!(out, "regime: {regime}")?;
    writeln!(out, "n: {}", data.len())?;
    writeln!(out, "m: {}", params.m)?;
    writeln!(out, "k: {}", params.k)?;
    writeln!(out, "queries: {}", family.len())?;
    writeln!(out, "sigma: {}", sigma.get())?;
    writeln!(out, "epsilon_total: {}", budget.epsilon_total())?;
    writeln!(out, "lp_objective: {}", fit.objective)?;
    writeln!(out, "lp_iterations: {}", fit.stats.iterations)?;
    writeln!(out, "accuracy: {}", report.worst_gap)?;
    writeln!(out, "worst_query: {}", report.worst_function)?;
    eprintln!(
        "timings_ms: estimate={estimate_ms:.3} sample_support={support_ms:.3} solve={:.3} sample_synthetic={sample_ms:.3}",
        fit.stats.wall_time.as_secs_f64() * 1e3
    );
    Ok(())
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = &args.output {
        config.output = dir.clone();
    }
    let outcomes = run_experiment(&config)?;
    let paths = emit_reports(&outcomes, &config.output)?;
    let failed = outcomes.iter().filter(|o| o.record.error.is_some()).count();
    writeln!(out, "trials: {}", outcomes.len())?;
    writeln!(out, "failed: {failed}")?;
    writeln!(out, "trials_csv: {}", paths.trials.display())?;
    writeln!(out, "summary_csv: {}", paths.summary.display())?;
    Ok(())
}

fn bounds_cmd(args: &BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let domain = parse_domain(&args.domain.domain)?;
    let regime = parse_regime(&args.regime)?;
    let family = validated(build_marginal_family_with_grid(&domain, args.family_degree, args.grid))?;
    let extremes = if args.uniform_truth {
        Some(DensityExtremes::Uniform)
    } else if let (Some(tau_min), Some(tau_max)) = (args.tau_min, args.tau_max) {
        Some(DensityExtremes::Bounds { tau_min, tau_max })
    } else if let (Some(tau), Some(lipschitz)) = (args.tau, args.lipschitz) {
        Some(DensityExtremes::Lipschitz { tau, lipschitz })
    } else {
        None
    };
    let constants = BoundConstants {
        c1: args.c1,
        c2: args.c2,
        c1_prime: args.c1_prime,
        c0: args.c0,
        c_prime: args.c_prime,
    };
    let mut req =
        BoundRequest::new(regime, domain, family.len(), args.epsilon, args.delta, args.gamma).with_constants(constants);
    req.extremes = extremes;
    let report = validated(required_parameters(&req))?;
    if args.csv {
        writeln!(out, "{}", BoundReport::CSV_HEADER)?;
        writeln!(out, "{}", report.csv_row())?;
    } else {
        writeln!(out, "queries: {}", family.len())?;
        writeln!(out, "{report}")?;
    }
    Ok(())
}

fn estimate_cmd(args: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let domain = parse_domain(&args.domain.domain)?;
    let regime = parse_regime(&args.regime)?;
    let data = load_data(&args.data, domain)?;
    let mut rng = SeededRng::with_stream(args.seed, 1);
    let (mu, _) = estimate_reference(regime, &data, args.epsilon, &args.kde, &mut rng)?;
    mu.density().write_csv(BufWriter::new(File::create(&args.out)?))?;
    let meta = mu.metadata();
    writeln!(out, "kind: {}", mu.kind().as_str())?;
    writeln!(out, "cells: {}", mu.density().len())?;
    writeln!(out, "clamped: {}", meta.clamped)?;
    writeln!(out, "degenerate: {}", meta.degenerate)?;
    Ok(())
}

/// Runs a parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Bounds(a) => bounds_cmd(a, out),
        Command::Estimate(a) => estimate_cmd(a, out),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
