//! Finite families of test functions `Ω → [-1, 1]`.

use crate::dataset::Dataset;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};

/// Default number of cells per coordinate for continuous box families.
pub const DEFAULT_BOX_GRID: usize = 4;

/// A single bounded test function.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    /// The constant 1.
    Constant,
    /// `Π_{i∈S} x_i` on a Boolean domain.
    Monomial(Vec<usize>),
    /// `1{x_S = v}` on a t-ary domain.
    ValueIndicator { coords: Vec<usize>, values: Vec<f64> },
    /// `1{x_i ∈ [lower_i, upper_i) for i ∈ S}`; an upper edge at 1 is closed.
    Box {
        coords: Vec<usize>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `2 x_i - 1` on the unit cube.
    FirstMoment(usize),
    /// `1{x = z}`.
    PointIndicator(Vec<f64>),
    /// Tabulated values at listed points (row-major), 0 elsewhere.
    Lookup { points: Vec<f64>, values: Vec<f64> },
}

impl Query {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Query::Constant => 1.0,
            Query::Monomial(coords) => coords.iter().map(|&i| x[i]).product(),
            Query::ValueIndicator { coords, values } => indicator(coords.iter().zip(values).all(|(&i, &v)| x[i] == v)),
            Query::Box { coords, lower, upper } => indicator(coords.iter().enumerate().all(|(s, &i)| {
                let v = x[i];
                v >= lower[s] && (v < upper[s] || (upper[s] >= 1.0 && v <= 1.0))
            })),
            Query::FirstMoment(i) => 2.0 * x[*i] - 1.0,
            Query::PointIndicator(z) => indicator(x == z.as_slice()),
            Query::Lookup { points, values } => points
                .chunks(x.len().max(1))
                .position(|z| z == x)
                .map_or(0.0, |i| values[i]),
        }
    }

    /// True when the function only takes values 0 and 1 by construction.
    pub fn is_indicator(&self) -> bool {
        !matches!(self, Query::Monomial(_) | Query::FirstMoment(_) | Query::Lookup { .. })
    }

    pub fn name(&self) -> String {
        fn join<T: std::fmt::Display>(items: &[T]) -> String {
            items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
        }
        match self {
            Query::Constant => "const".into(),
            Query::Monomial(c) => format!("x[{}]", join(c)),
            Query::ValueIndicator { coords, values } => {
                format!("x[{}]=={}", join(coords), join(values))
            }
            Query::Box { coords, lower, upper } => {
                let parts: Vec<String> = coords
                    .iter()
                    .enumerate()
                    .map(|(s, i)| format!("x{i}:[{},{})", lower[s], upper[s]))
                    .collect();
                format!("box{{{}}}", parts.join(";"))
            }
            Query::FirstMoment(i) => format!("2x{i}-1"),
            Query::PointIndicator(z) => format!("at({})", join(z)),
            Query::Lookup { values, .. } => format!("lookup[{}]", values.len()),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedQuery {
    pub name: String,
    pub query: Query,
}

/// An ordered family of named queries bound to one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFamily {
    domain: DomainSpec,
    functions: Vec<NamedQuery>,
    degree: Option<usize>,
}

impl QueryFamily {
    pub fn new(domain: DomainSpec, queries: Vec<Query>) -> Self {
        let functions = queries
            .into_iter()
            .map(|query| NamedQuery {
                name: query.name(),
                query,
            })
            .collect();
        Self {
            domain,
            functions,
            degree: None,
        }
    }

    /// Indicator of every point in a discrete domain.
    pub fn point_indicators(domain: DomainSpec) -> Result<Self> {
        let points = domain.enumerate()?;
        let queries = points
            .chunks(domain.dim())
            .map(|p| Query::PointIndicator(p.to_vec()))
            .collect();
        Ok(Self::new(domain, queries))
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn functions(&self) -> &[NamedQuery] {
        &self.functions
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &NamedQuery> + '_ {
        self.functions.iter()
    }

    /// Appends one more query, keeping everything else.
    pub fn with(mut self, query: Query) -> Self {
        self.functions.push(NamedQuery {
            name: query.name(),
            query,
        });
        self
    }

    pub(crate) fn check_domain(&self, other: &DomainSpec) -> Result<()> {
        if &self.domain != other {
            return Err(Error::DomainMismatch(format!(
                "query family over {:?}, data over {:?}",
                self.domain, other
            )));
        }
        Ok(())
    }
}

/// All subsets of `0..dim` with size in `1..=degree`, by size then
/// lexicographically.
fn subsets(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, dim: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            extend(i + 1, dim, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=degree {
        extend(0, dim, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Every assignment in `{0..base-1}^len`, lexicographic.
fn assignments(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Marginal queries up to `degree`.
///
/// * Boolean: one monomial per subset of size at most `degree`, the empty
///   subset giving the constant.
/// * t-ary: the constant plus `1{x_S = v}` for every nonempty subset and
///   value assignment.
/// * Continuous: the constant, box indicators on a `grid`-cell partition of
///   each coordinate for every nonempty subset, and `2x_i - 1`.
pub fn build_marginal_family(domain: &DomainSpec, degree: usize) -> Result<QueryFamily> {
    build_marginal_family_with_grid(domain, degree, DEFAULT_BOX_GRID)
}

pub fn build_marginal_family_with_grid(domain: &DomainSpec, degree: usize, grid: usize) -> Result<QueryFamily> {
    let dim = domain.dim();
    if degree == 0 || degree > dim {
        return Err(Error::DegreeOutOfRange { degree, dim });
    }
    let mut queries = vec![Query::Constant];
    match domain.levels() {
        Some(2) => {
            queries.extend(subsets(dim, degree).into_iter().map(Query::Monomial));
        }
        Some(levels) => {
            for coords in subsets(dim, degree) {
                for values in assignments(levels, coords.len()) {
                    queries.push(Query::ValueIndicator {
                        coords: coords.clone(),
                        values: values.into_iter().map(|v| v as f64).collect(),
                    });
                }
            }
        }
        None => {
            if grid == 0 {
                return Err(Error::ParameterOutOfRange {
                    name: "grid",
                    value: 0.0,
                    expected: "at least 1",
                });
            }
            let width = 1.0 / grid as f64;
            for coords in subsets(dim, degree) {
                for cells in assignments(grid, coords.len()) {
                    queries.push(Query::Box {
                        coords: coords.clone(),
                        lower: cells.iter().map(|&c| c as f64 * width).collect(),
                        upper: cells
                            .iter()
                            .map(|&c| if c + 1 == grid { 1.0 } else { (c + 1) as f64 * width })
                            .collect(),
                    });
                }
            }
            queries.extend((0..dim).map(Query::FirstMoment));
        }
    }
    let mut family = QueryFamily::new(*domain, queries);
    family.degree = Some(degree);
    Ok(family)
}

/// `(1/n) Σ_i f(x_i)` for each query, in family order.
pub fn empirical_average(family: &QueryFamily, data: &Dataset) -> Result<Vec<f64>> {
    family.check_domain(data.domain())?;
    let n = data.len() as f64;
    let mut sums = vec![0.0; family.len()];
    for row in data.rows() {
        for (acc, f) in sums.iter_mut().zip(family.iter()) {
            *acc += f.query.eval(row);
        }
    }
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// `Σ_z f(z) w(z)` for each query over a weighted point list (row-major).
pub fn weighted_average(family: &QueryFamily, points: &[f64], weights: &[f64]) -> Vec<f64> {
    let dim = family.domain.dim();
    family
        .iter()
        .map(|f| points.chunks(dim).zip(weights).map(|(z, w)| f.query.eval(z) * w).sum())
        .collect()
}
