//! Bounded-variable revised simplex for the relaxations solved during branch-and-cut.

mod factor;
mod format;
mod simplex;

pub use format::write_lp;
pub use simplex::Simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `min c·x` subject to sparse rows and column bounds (bounds may be infinite).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a column and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(Constraint::new(coeffs, sense, rhs));
        self.constraints.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidModel("bound vectors do not match the objective length".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("column {j} has bounds [{l}, {u}]")));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::InvalidModel(format!("column {j} has cost {}", self.objective[j])));
            }
        }
        let mut seen = vec![usize::MAX; n];
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("row {r} has right-hand side {}", row.rhs)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::InvalidModel(format!("row {r} references column {j} of {n}")));
                }
                if seen[j] == r {
                    return Err(LpError::InvalidModel(format!("row {r} repeats column {j}")));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!("row {r} has coefficient {a} on column {j}")));
                }
                seen[j] = r;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column held at zero.
    Free,
}

/// Status of every structural column followed by every row logical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row: non-negative on `>=` rows, non-positive on `<=` rows at optimality.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

impl LpResult {
    /// Dual objective: `sum y_i b_i` plus the bound terms of the nonbasic columns.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut v: f64 = lp.constraints.iter().zip(&self.duals).map(|(r, y)| r.rhs * y).sum();
        for j in 0..lp.n_vars() {
            let d = self.reduced_costs[j];
            if d != 0.0 {
                v += d * self.x[j];
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Smallest pivot accepted when factorizing.
    pub pivot_tol: f64,
    /// Smallest `|alpha|` a basic variable needs to limit the step in the ratio test.
    pub ratio_pivot_tol: f64,
    pub refactor_every: usize,
    /// Non-improving iterations before the bounds are perturbed.
    pub perturb_after: usize,
    /// Non-improving iterations before Bland's rule takes over.
    pub bland_after: usize,
    pub max_iterations: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-10,
            ratio_pivot_tol: 1e-7,
            refactor_every: 50,
            perturb_after: 100,
            bland_after: 1000,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    InvalidModel(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// One-shot solve; `warm` is used when it matches the program's dimensions.
pub fn solve_lp(lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpResult, LpError> {
    solve_lp_with(lp, warm, LpOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, warm: Option<&Basis>, opts: LpOptions) -> Result<LpResult, LpError> {
    let mut s = Simplex::new(lp, opts)?;
    if let Some(b) = warm {
        s.load_basis(b);
    }
    s.solve()
}
