//! Primal-dual interior-point solver for linear conic programs over products
//! of PSD cones.
//!
//! Problem form (all decision variables free):
//!
//! ```text
//! minimize    cᵀx
//! subject to  A x = b
//!             M_b(x) = H_b + Σ_j x_j G_{b,j}  ⪰ 0   for every block b
//! ```
//!
//! Each block is a real-symmetric or complex-Hermitian matrix; its entries
//! are stored in an orthonormal vectorization (diagonal entries, then √2·Re
//! and √2·Im of the strict upper triangle) so that vector dot products equal
//! `Re tr(XY)`.

mod cone;
mod dense;
mod solver;

use alloc::vec;
use alloc::vec::Vec;

pub use cone::{embed_matrix, mat_of, vec_len, vec_of};
pub(crate) use cone::{diag_index, off_index};
pub use solver::{solve, IterStats};

use crate::error::{Error, Result};
use crate::linalg::{C64, Hermitian};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// One PSD constraint `H + Σ_j x_j G_j ⪰ 0`, stored in vectorized
/// coordinates.
#[derive(Clone, Debug)]
pub struct PsdBlock {
    pub dim: usize,
    pub field: Field,
    /// Vectorized constant term H.
    pub constant: Vec<f64>,
    /// Sparse vectorized coefficients, one list per decision variable.
    pub coeffs: Vec<Vec<(usize, f64)>>,
}

impl PsdBlock {
    pub fn vec_len(&self) -> usize {
        vec_len(self.dim, self.field)
    }
}

#[derive(Clone, Debug)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub c: Vec<f64>,
    /// Equality rows as sparse (variable, coefficient) lists.
    pub eq_rows: Vec<Vec<(usize, f64)>>,
    pub eq_rhs: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
}

impl ConicProgram {
    pub fn new(n_vars: usize) -> Self {
        ConicProgram { n_vars, c: vec![0.0; n_vars], eq_rows: Vec::new(), eq_rhs: Vec::new(), blocks: Vec::new() }
    }

    pub fn add_block(&mut self, dim: usize, field: Field) -> usize {
        let len = vec_len(dim, field);
        self.blocks.push(PsdBlock { dim, field, constant: vec![0.0; len], coeffs: vec![Vec::new(); self.n_vars] });
        self.blocks.len() - 1
    }

    /// Add `value` to entry (i, j) of the constant term (and its conjugate
    /// to (j, i)).
    pub fn add_constant(&mut self, block: usize, i: usize, j: usize, value: C64) {
        let b = &mut self.blocks[block];
        for (k, v) in cone::entry_coords(b.dim, b.field, i, j, value) {
            b.constant[k] += v;
        }
    }

    /// Add `value` to entry (i, j) of G_var (and its conjugate to (j, i)).
    pub fn add_coeff(&mut self, block: usize, var: usize, i: usize, j: usize, value: C64) {
        let b = &mut self.blocks[block];
        for (k, v) in cone::entry_coords(b.dim, b.field, i, j, value) {
            push_merge(&mut b.coeffs[var], k, v);
        }
    }

    /// Add a whole Hermitian coefficient matrix at offset (r0, c0) of the
    /// block, mirrored so that the block stays Hermitian. Only entries on
    /// or above the block diagonal are read when `r0 == c0`.
    pub fn add_coeff_matrix(&mut self, block: usize, var: usize, r0: usize, c0: usize, m: &crate::linalg::CMat) {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let (gi, gj) = (r0 + i, c0 + j);
                if r0 == c0 && gi > gj {
                    continue;
                }
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    self.add_coeff(block, var, gi, gj, v);
                }
            }
        }
    }

    pub fn add_equality(&mut self, row: Vec<(usize, f64)>, rhs: f64) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.n_vars {
            return Err(Error::Program(alloc::format!("objective has {} entries for {} variables", self.c.len(), self.n_vars)));
        }
        if self.eq_rows.len() != self.eq_rhs.len() {
            return Err(Error::Program("equality rows and right-hand sides differ in length".into()));
        }
        for row in &self.eq_rows {
            if row.iter().any(|&(j, _)| j >= self.n_vars) {
                return Err(Error::Program("equality references an unknown variable".into()));
            }
        }
        for b in &self.blocks {
            if b.coeffs.len() != self.n_vars || b.constant.len() != b.vec_len() {
                return Err(Error::Program("block storage inconsistent with variable count".into()));
            }
            if b.coeffs.iter().flatten().any(|&(k, _)| k >= b.vec_len()) {
                return Err(Error::Program("block coefficient outside the block".into()));
            }
        }
        let all_finite = self.c.iter().chain(&self.eq_rhs).all(|v| v.is_finite())
            && self.blocks.iter().all(|b| b.constant.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::Program("non-finite data".into()));
        }
        Ok(())
    }

    /// Evaluate the block matrix M_b(x).
    pub fn block_value(&self, block: usize, x: &[f64]) -> Hermitian {
        let b = &self.blocks[block];
        let mut v = b.constant.clone();
        for (j, col) in b.coeffs.iter().enumerate() {
            for &(k, g) in col {
                v[k] += x[j] * g;
            }
        }
        mat_of(&v, b.dim, b.field)
    }

    /// Same program with every complex-Hermitian block replaced by its
    /// real-symmetric 2d x 2d embedding [[Re, -Im], [Im, Re]].
    pub fn with_real_embedding(&self) -> ConicProgram {
        let mut out = self.clone();
        for b in out.blocks.iter_mut() {
            if b.field == Field::Real {
                continue;
            }
            let d = b.dim;
            let convert = |v: &[f64]| -> Vec<f64> {
                let m = mat_of(v, d, Field::Complex);
                let e = embed_matrix(&m);
                vec_of(&e, Field::Real)
            };
            let constant = convert(&b.constant);
            let coeffs = b
                .coeffs
                .iter()
                .map(|col| {
                    if col.is_empty() {
                        return Vec::new();
                    }
                    let mut dense = vec![0.0; vec_len(d, Field::Complex)];
                    for &(k, g) in col {
                        dense[k] += g;
                    }
                    convert(&dense).into_iter().enumerate().filter(|(_, g)| *g != 0.0).collect()
                })
                .collect();
            *b = PsdBlock { dim: 2 * d, field: Field::Real, constant, coeffs };
        }
        out
    }
}

fn push_merge(col: &mut Vec<(usize, f64)>, k: usize, v: f64) {
    if let Some(e) = col.iter_mut().find(|e| e.0 == k) {
        e.1 += v;
    } else {
        col.push((k, v));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIter,
    /// Farkas certificate for the primal: no feasible x exists.
    Infeasible,
    /// Improving primal ray: the objective is unbounded below.
    Unbounded,
    NumericalFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIter => "max_iter",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Extra identity shift added to the initial slack and dual iterates.
    /// Zero reproduces the standard start; other values let callers probe
    /// sensitivity of the returned optimizer to the starting point.
    pub init_perturbation: f64,
    /// Record per-iteration statistics in the solution.
    pub record_history: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            max_iter: 200,
            step_fraction: 0.98,
            init_perturbation: 0.0,
            record_history: false,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0 && self.feas_tol > 0.0) {
            return Err(Error::Program("tolerances must be positive".into()));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::Program("step fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: Status,
    /// Primal point.
    pub x: Vec<f64>,
    /// Multipliers of the equality constraints (on the original rows).
    pub y: Vec<f64>,
    /// Dual matrices, one per block (vectorized).
    pub z: Vec<Vec<f64>>,
    /// Primal slack matrices M_b(x), vectorized.
    pub s: Vec<Vec<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Complementarity gap sᵀz.
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterStats>,
}
