//! Dense-tableau two-phase simplex with Bland's rule.
//!
//! Solves `min cᵀx` subject to `x ≥ 0` and rows `aᵢᵀx (≤ | = | ≥) bᵢ`.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    // (rows + 1) × (cols + 1); last row is the cost row, last column the rhs
    cells: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    limit: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn cost_row(&self) -> &[f64] {
        let start = self.rows * self.width;
        &self.cells[start..start + self.width]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.cells[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.cells[r * w + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.cells[r * w..(r + 1) * w];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on the current cost row; columns at or beyond
    /// `allowed` never enter.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        loop {
            let entering = self.cost_row()[..allowed].iter().position(|&c| c < -COST_TOL);
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        if ratio < bv - 1e-14 || (ratio <= bv + 1e-14 && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
            // unbounded directions cannot occur for the bounded programs built here
            let Some((pr, _)) = best else {
                return Err(Error::Infeasible);
            };
            if self.iterations >= self.limit {
                return Err(Error::IterationLimit(self.iterations));
            }
            self.pivot(pr, pc);
            self.iterations += 1;
        }
    }
}

/// Solves `lp`. Unbounded programs are reported as [`Error::Infeasible`].
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.objective.len();
    let rows = lp.constraints.len();
    for c in &lp.constraints {
        if c.coefficients.len() != n {
            return Err(Error::DimensionMismatch {
                left: c.coefficients.len(),
                right: n,
            });
        }
    }
    // normalize to nonnegative rhs
    let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coefficients.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coefficients.clone(), c.relation, c.rhs)
            }
        })
        .collect();
    let slacks = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
    let artificials = normalized.iter().filter(|c| c.1 != Relation::Le).count();
    let cols = n + slacks + artificials;
    let width = cols + 1;
    let mut cells = vec![0.0; (rows + 1) * width];
    let mut basis = vec![0; rows];
    let (mut s, mut a) = (n, n + slacks);
    for (r, (coef, rel, rhs)) in normalized.iter().enumerate() {
        let row = &mut cells[r * width..(r + 1) * width];
        row[..n].copy_from_slice(coef);
        row[cols] = *rhs;
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                basis[r] = a;
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                basis[r] = a;
                a += 1;
            }
        }
    }
    let mut t = Tableau {
        rows,
        width,
        cells,
        basis,
        iterations: 0,
        limit: 50 * (rows + cols),
    };

    let real = n + slacks;
    if artificials > 0 {
        // phase 1 cost: Σ artificials, expressed in nonbasic terms
        let cost_start = rows * width;
        for r in 0..rows {
            if t.basis[r] >= real {
                for c in 0..width {
                    t.cells[cost_start + c] -= t.cells[r * width + c];
                }
            }
        }
        for c in real..cols {
            t.cells[cost_start + c] = 0.0;
        }
        t.optimize(cols)?;
        if -t.cost_row()[cols] > FEASIBILITY_TOL {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..rows {
            if t.basis[r] >= real {
                if let Some(pc) = (0..real).find(|&c| t.at(r, c).abs() > 1e-9) {
                    t.pivot(r, pc);
                }
            }
        }
    }

    // phase 2 cost row
    let cost_start = rows * width;
    for c in 0..width {
        t.cells[cost_start + c] = if c < n { lp.objective[c] } else { 0.0 };
    }
    for r in 0..rows {
        let b = t.basis[r];
        let cb = if b < n { lp.objective[b] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..width {
                t.cells[cost_start + c] -= cb * t.cells[r * width + c];
            }
        }
    }
    t.optimize(real)?;

    let mut x = vec![0.0; n];
    for r in 0..rows {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations: t.iterations,
    })
}
