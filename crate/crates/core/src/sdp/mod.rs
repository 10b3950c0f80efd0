//! Dense semidefinite programming.
//!
//! Problems are stated in primal standard form over a product of real
//! symmetric PSD blocks:
//!
//! ```text
//! minimize    sum_b <C_b, X_b>
//! subject to  sum_b <A_kb, X_b> = b_k      k = 1..m
//!             X_b >= 0
//! ```
//!
//! with dual `maximize b^T y  s.t.  S_b = C_b - sum_k y_k A_kb >= 0`.
//! Complex Hermitian constraints enter through [`hermitian_to_real_embedding`].

mod dump;
mod embedding;
mod solver;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use dump::{read_dump, write_dump};
pub use embedding::{hermitian_functional, hermitian_to_real_embedding, real_to_hermitian};
pub use solver::{solve, SdpSolver};

/// One equality constraint `sum_b <A_b, X_b> = rhs`. Blocks the constraint
/// does not touch are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub matrices: Vec<Option<DMatrix<f64>>>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<DMatrix<f64>>,
    pub constraints: Vec<Constraint>,
}

const SYM_TOL: f64 = 1e-12;

fn check_symmetric(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(invalid(format!("{what}: expected {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYM_TOL * scale {
        return Err(invalid(format!("{what} is not symmetric (asymmetry {asym:.3e})")));
    }
    Ok(())
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<usize>,
        objective: Vec<DMatrix<f64>>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(invalid("SDP needs at least one non-empty block"));
        }
        if objective.len() != blocks.len() {
            return Err(invalid("objective must have one matrix per block"));
        }
        for (b, (c, &n)) in objective.iter().zip(&blocks).enumerate() {
            check_symmetric(c, n, &format!("objective block {b}"))?;
        }
        for (k, con) in constraints.iter().enumerate() {
            if con.matrices.len() != blocks.len() {
                return Err(invalid(format!("constraint {k} must list one entry per block")));
            }
            for (b, (a, &n)) in con.matrices.iter().zip(&blocks).enumerate() {
                if let Some(a) = a {
                    check_symmetric(a, n, &format!("constraint {k} block {b}"))?;
                }
            }
            if !con.rhs.is_finite() {
                return Err(invalid(format!("constraint {k} has a non-finite right-hand side")));
            }
        }
        Ok(Self { blocks, objective, constraints })
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `sum_b <C_b, X_b>`.
    pub fn objective_value(&self, x: &[DMatrix<f64>]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }

    /// `max_k |<A_k, X> - b_k|`.
    pub fn primal_residual(&self, x: &[DMatrix<f64>]) -> f64 {
        self.constraints
            .iter()
            .map(|con| {
                let lhs: f64 = con
                    .matrices
                    .iter()
                    .zip(x)
                    .filter_map(|(a, x)| a.as_ref().map(|a| a.dot(x)))
                    .sum();
                (lhs - con.rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `C - sum_k y_k A_k`, block by block.
    pub fn dual_slack(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut s = self.objective.clone();
        for (con, &yk) in self.constraints.iter().zip(y.iter()) {
            for (sb, a) in s.iter_mut().zip(&con.matrices) {
                if let Some(a) = a {
                    *sb -= a * yk;
                }
            }
        }
        s
    }

    /// `sum_k y_k A_k`, block by block.
    pub fn constraint_combination(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (con, &yk) in self.constraints.iter().zip(y.iter()) {
            for (ob, a) in out.iter_mut().zip(&con.matrices) {
                if let Some(a) = a {
                    *ob += a * yk;
                }
            }
        }
        out
    }

    pub fn dual_objective_value(&self, y: &DVector<f64>) -> f64 {
        self.constraints.iter().zip(y.iter()).map(|(c, yk)| c.rhs * yk).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Absolute tolerance on primal and dual equality residuals.
    pub feasibility_tol: f64,
    /// Relative duality-gap tolerance: `|pobj - dobj| <= gap_tol (1 + |pobj|)`.
    pub gap_tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Relative threshold below which a constraint row counts as dependent.
    pub presolve_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            gap_tol: 1e-7,
            max_iterations: 200,
            step_fraction: 0.99,
            presolve_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    /// No feasible `X`; `farkas` holds `y` with `b^T y = 1` and `sum y_k A_k <= 0`.
    Infeasible,
    /// The dual is infeasible (primal unbounded or ill-posed).
    DualInfeasible,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub mu: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterationStats>,
    pub farkas: Option<DVector<f64>>,
    /// Indices of constraints dropped as linearly dependent.
    pub removed_constraints: Vec<usize>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// Symmetric vectorization with `sqrt(2)` on off-diagonal entries, so that
/// `svec(A) . svec(B) = <A, B>`. Column-major over the upper triangle.
pub(crate) fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            out[k] = if i == j {
                m[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
            };
            k += 1;
        }
    }
}

pub(crate) fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, j)] = v[k];
            } else {
                let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

pub(crate) fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}
