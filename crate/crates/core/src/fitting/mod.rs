//! Minimax density fitting over a sampled reduced support.
//!
//! `Ω* = {z₁, …, z_m}` is drawn from the reference distribution, each query
//! target is its empirical average plus Laplace noise, and the fitted
//! density solves
//!
//! ```text
//! min_h  max_f |Σᵢ f(zᵢ) hᵢ − a_f|   over   hᵢ ≥ 0, Σᵢ hᵢ = 1.
//! ```

pub mod simplex;

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::dataset::Dataset;
use crate::density::{sample_density, DiscreteDensity};
use crate::error::{Error, Result};
use crate::estimators::ReferenceDistribution;
use crate::metrics::{accuracy, AccuracyReport};
use crate::noise::{laplace_scale_for_generation, sample_laplace, LaplaceScale};
use crate::privacy::PrivacyBudget;
use crate::query::{empirical_average, QueryFamily};
use crate::rng::SeededRng;

use simplex::{Constraint, LinearProgram, Relation};

#[derive(Debug, Clone, PartialEq)]
pub struct FittingProblem {
    family: QueryFamily,
    support: Dataset,
    targets: Vec<f64>,
    // |F| × m, row-major
    coefficients: Vec<f64>,
}

impl FittingProblem {
    /// Problem over an explicit support (duplicates allowed) and targets.
    pub fn from_parts(family: QueryFamily, support: Dataset, targets: Vec<f64>) -> Result<Self> {
        family.check_domain(support.domain())?;
        if support.is_empty() {
            return Err(Error::ParameterOutOfRange {
                name: "m",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if targets.len() != family.len() {
            return Err(Error::DimensionMismatch {
                left: targets.len(),
                right: family.len(),
            });
        }
        let mut coefficients = Vec::with_capacity(family.len() * support.len());
        for f in family.iter() {
            coefficients.extend(support.rows().map(|z| f.query.eval(z)));
        }
        Ok(Self {
            family,
            support,
            targets,
            coefficients,
        })
    }

    pub fn family(&self) -> &QueryFamily {
        &self.family
    }

    pub fn support(&self) -> &Dataset {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `F[f][i] = f(zᵢ)`, one row per query.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient_row(&self, f: usize) -> &[f64] {
        let m = self.support.len();
        &self.coefficients[f * m..(f + 1) * m]
    }

    /// `max_f |Σᵢ F[f][i] hᵢ − a_f|`.
    pub fn objective_at(&self, weights: &[f64]) -> f64 {
        (0..self.family.len())
            .map(|f| {
                let fit: f64 = self.coefficient_row(f).iter().zip(weights).map(|(c, h)| c * h).sum();
                (fit - self.targets[f]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Variables `h₁…h_m, u`; two rows per query plus the simplex row.
    pub fn linear_program(&self) -> LinearProgram {
        let m = self.support.len();
        let mut objective = vec![0.0; m + 1];
        objective[m] = 1.0;
        let mut constraints = Vec::with_capacity(2 * self.family.len() + 1);
        for (f, &a) in self.targets.iter().enumerate() {
            let row = self.coefficient_row(f);
            let mut upper: Vec<f64> = row.to_vec();
            upper.push(-1.0);
            let mut lower: Vec<f64> = row.iter().map(|c| -c).collect();
            lower.push(-1.0);
            constraints.push(Constraint {
                coefficients: upper,
                relation: Relation::Le,
                rhs: a,
            });
            constraints.push(Constraint {
                coefficients: lower,
                relation: Relation::Le,
                rhs: -a,
            });
        }
        let mut simplex_row = vec![1.0; m + 1];
        simplex_row[m] = 0.0;
        constraints.push(Constraint {
            coefficients: simplex_row,
            relation: Relation::Eq,
            rhs: 1.0,
        });
        LinearProgram { objective, constraints }
    }

    /// Writes the program in CPLEX LP text format.
    pub fn write_lp<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.support.len();
        writeln!(
            out,
            "\\ minimax fit: {} queries, {} support points",
            self.family.len(),
            m
        )?;
        writeln!(out, "Minimize")?;
        writeln!(out, " obj: u")?;
        writeln!(out, "Subject To")?;
        let terms = |row: &[f64], sign: f64| -> String {
            let mut s = String::new();
            for (i, &c) in row.iter().enumerate() {
                let c = sign * c;
                if c == 0.0 {
                    continue;
                }
                let op = if c < 0.0 { '-' } else { '+' };
                s.push_str(&format!(" {op} {} h{i}", c.abs()));
            }
            s
        };
        for (f, nq) in self.family.iter().enumerate() {
            let row = self.coefficient_row(f);
            let a = self.targets[f];
            writeln!(out, " up{f}:{} - u <= {a}", terms(row, 1.0))?;
            writeln!(out, " lo{f}:{} - u <= {}", terms(row, -1.0), -a)?;
            writeln!(out, " \\ {}", nq.name)?;
        }
        let sum: String = (0..m).map(|i| format!(" + h{i}")).collect();
        writeln!(out, " simplex:{sum} = 1")?;
        writeln!(out, "Bounds")?;
        for i in 0..m {
            writeln!(out, " h{i} >= 0")?;
        }
        writeln!(out, " u >= 0")?;
        writeln!(out, "End")?;
        Ok(())
    }
}

/// Draws `Ω*` from `mu` and perturbs the empirical averages with `Lap(σ)`.
pub fn build_problem(
    data: &Dataset,
    family: &QueryFamily,
    mu: &ReferenceDistribution,
    m: usize,
    sigma: LaplaceScale,
    rng: &mut SeededRng,
) -> Result<FittingProblem> {
    let support = sample_support(data, family, mu, m, rng)?;
    let noise = sample_laplace(sigma, family.len(), rng);
    problem_from_noise(data, family, support, &noise)
}

/// [`build_problem`] with caller-supplied noise, one value per query.
pub fn build_problem_with_noise(
    data: &Dataset,
    family: &QueryFamily,
    mu: &ReferenceDistribution,
    m: usize,
    noise: &[f64],
    rng: &mut SeededRng,
) -> Result<FittingProblem> {
    let support = sample_support(data, family, mu, m, rng)?;
    problem_from_noise(data, family, support, noise)
}

fn sample_support(
    data: &Dataset,
    family: &QueryFamily,
    mu: &ReferenceDistribution,
    m: usize,
    rng: &mut SeededRng,
) -> Result<Dataset> {
    family.check_domain(data.domain())?;
    family.check_domain(mu.domain())?;
    if m == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: 0.0,
            expected: "at least 1",
        });
    }
    mu.sample(m, rng)
}

fn problem_from_noise(data: &Dataset, family: &QueryFamily, support: Dataset, noise: &[f64]) -> Result<FittingProblem> {
    if noise.len() != family.len() {
        return Err(Error::DimensionMismatch {
            left: noise.len(),
            right: family.len(),
        });
    }
    let targets = empirical_average(family, data)?
        .into_iter()
        .zip(noise)
        .map(|(a, l)| a + l)
        .collect();
    FittingProblem::from_parts(family.clone(), support, targets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `h*(zᵢ)` for each support entry, duplicates kept separate.
    pub weights: Vec<f64>,
    /// `h*` with duplicate support points merged.
    pub density: DiscreteDensity,
    /// Achieved value of `u`.
    pub objective: f64,
    pub stats: SolverStats,
}

/// Solves the minimax program of `problem`.
pub fn solve_minimax(problem: &FittingProblem) -> Result<FitResult> {
    let start = Instant::now();
    let m = problem.support_size();
    let lp = problem.linear_program();
    let solution = simplex::solve(&lp)?;
    let mut weights: Vec<f64> = solution.x[..m].iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Infeasible);
    }
    weights.iter_mut().for_each(|w| *w /= total);
    let density = merge_support(problem.support(), &weights)?;
    Ok(FitResult {
        weights,
        density,
        objective: solution.x[m],
        stats: SolverStats {
            iterations: solution.iterations,
            wall_time: start.elapsed(),
        },
    })
}

fn merge_support(support: &Dataset, weights: &[f64]) -> Result<DiscreteDensity> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut merged = Vec::new();
    for (z, &w) in support.rows().zip(weights) {
        let key: Vec<u64> = z.iter().map(|v| v.to_bits()).collect();
        match index.get(&key) {
            Some(&i) => merged[i] += w,
            None => {
                index.insert(key, merged.len());
                points.extend_from_slice(z);
                merged.push(w);
            }
        }
    }
    DiscreteDensity::new(*support.domain(), points, merged)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationParams {
    /// Reduced-support size.
    pub m: usize,
    /// Number of synthetic records.
    pub k: usize,
    pub delta: f64,
    pub gamma: f64,
}

/// Wall-times in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub sample_support_ms: f64,
    pub solve_ms: f64,
    pub sample_synthetic_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub timings: StageTimings,
    pub accuracy: AccuracyReport,
    pub sigma: f64,
    pub epsilon_total: f64,
    /// Whether `n ≥ (2|F|/(εδ)) ln(|F|/γ)` holds for the generation budget.
    pub privacy_condition_met: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutput {
    pub synthetic: Dataset,
    pub fit: FitResult,
    pub record: GenerationRecord,
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Full pipeline from a fixed reference distribution to `k` synthetic records.
pub fn generate(
    data: &Dataset,
    family: &QueryFamily,
    mu: &ReferenceDistribution,
    params: GenerationParams,
    budget: PrivacyBudget,
    rng: &mut SeededRng,
) -> Result<GenerationOutput> {
    if params.k == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "k",
            value: 0.0,
            expected: "at least 1",
        });
    }
    let sigma = laplace_scale_for_generation(params.delta, family.len(), params.gamma)?;

    let t = Instant::now();
    let problem = build_problem(data, family, mu, params.m, sigma, rng)?;
    let sample_support_ms = millis(t.elapsed());

    let t = Instant::now();
    let fit = solve_minimax(&problem)?;
    let solve_ms = millis(t.elapsed());

    let t = Instant::now();
    let synthetic = sample_density(&fit.density, params.k, rng)?;
    let sample_synthetic_ms = millis(t.elapsed());

    let accuracy = accuracy(family, data, &synthetic)?;
    let f = family.len() as f64;
    let needed = 2.0 * f / (budget.epsilon_generation() * params.delta) * (f / params.gamma).ln();
    Ok(GenerationOutput {
        synthetic,
        fit,
        record: GenerationRecord {
            timings: StageTimings {
                sample_support_ms,
                solve_ms,
                sample_synthetic_ms,
            },
            accuracy,
            sigma: sigma.get(),
            epsilon_total: budget.epsilon_total(),
            privacy_condition_met: data.len() as f64 >= needed,
        },
    })
}
