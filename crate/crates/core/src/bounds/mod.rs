//! Bound functions for fixed estimator operators, and the optimized bounds.
//!
//! Estimators are lists `X = (X_1, …, X_n)` of Hermitian operators. The
//! optimized bounds (`hcrb`, `ncrb`, `nhcrb`) are conic programs built in
//! the eigenbasis of the state, over quotient-basis coordinates of `X`.

mod programs;

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{pos_neg_split, sandwich_trabs, sqrt_psd, trabs, CMat, Hermitian, I, RANK_TOL};
use crate::model::{sld_operators, sld_optimizer, StatisticalModel, WeightMatrix};
use crate::sdp::Status;

pub use programs::{bound_program, hcrb, min_trace_dominating, ncrb, nh_function, nh_split, nhcrb};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Sld,
    Holevo,
    Nagaoka,
    NagaokaHayashi,
}

impl BoundKind {
    /// Short identifier used in serialized output.
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Sld => "sld",
            BoundKind::Holevo => "hcrb",
            BoundKind::Nagaoka => "ncrb",
            BoundKind::NagaokaHayashi => "nhcrb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sld" | "sldcrb" => BoundKind::Sld,
            "hcrb" => BoundKind::Holevo,
            "ncrb" => BoundKind::Nagaoka,
            "nhcrb" => BoundKind::NagaokaHayashi,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub status: Status,
    pub relative_gap: f64,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Largest violation of the locally unbiased conditions at the
    /// extracted optimizer.
    pub unbiasedness_residual: f64,
}

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub kind: BoundKind,
    pub value: f64,
    pub optimizer: Vec<Hermitian>,
    pub copies: usize,
    pub diagnostics: Diagnostics,
}

impl BoundResult {
    pub fn is_optimal(&self) -> bool {
        self.diagnostics.status == Status::Optimal
    }
}

fn check_estimators(m: &StatisticalModel, x: &[Hermitian]) -> Result<()> {
    if x.len() != m.n_params() {
        return Err(Error::WrongArity { expected: m.n_params(), found: x.len() });
    }
    for xi in x {
        if xi.dim() != m.dim() {
            return Err(Error::WrongDim { expected: m.dim(), found: xi.dim() });
        }
    }
    Ok(())
}

fn require_two(m: &StatisticalModel) -> Result<()> {
    if m.n_params() != 2 {
        return Err(Error::WrongArity { expected: 2, found: m.n_params() });
    }
    Ok(())
}

/// Z_ij = tr(S X_j X_i).
pub fn z_matrix(m: &StatisticalModel, x: &[Hermitian]) -> Result<CMat> {
    check_estimators(m, x)?;
    let n = x.len();
    let sx: Vec<CMat> = x.iter().map(|xi| m.state().as_mat().matmul(xi.as_mat())).collect();
    let mut z = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = sx[j].trace_mul(x[i].as_mat());
            z[(i, j)] = v;
            z[(j, i)] = v.conj();
        }
    }
    Ok(z)
}

/// Trace norm of a real antisymmetric matrix given row-major.
fn antisym_trabs(b: &[f64], n: usize) -> Result<f64> {
    let h = Hermitian::symmetrize(CMat::from_fn(n, n, |i, j| I * b[i * n + j]));
    trabs(&h)
}

/// tr(W Re Z) + trabs(√W Im Z √W).
pub fn holevo_function(m: &StatisticalModel, x: &[Hermitian], w: &WeightMatrix) -> Result<f64> {
    let z = z_matrix(m, x)?;
    let n = x.len();
    w.check_arity(n)?;
    let first: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| w.at(i, j) * z[(j, i)].re).sum();
    let rw = w.sqrt()?;
    let im: Vec<f64> = (0..n * n).map(|k| z[(k / n, k % n)].im).collect();
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += rw[i * n + k] * im[k * n + l] * rw[l * n + j];
                }
            }
            t[i * n + j] = acc;
        }
    }
    Ok(first + antisym_trabs(&t, n)?)
}

/// Σ_i tr(S X_i X_i).
pub fn sld_function(m: &StatisticalModel, x: &[Hermitian]) -> Result<f64> {
    let z = z_matrix(m, x)?;
    Ok((0..x.len()).map(|i| z[(i, i)].re).sum())
}

/// A(X) = i√S[X, Y]√S for two estimators.
pub fn a_matrix(m: &StatisticalModel, x: &[Hermitian]) -> Result<Hermitian> {
    require_two(m)?;
    check_estimators(m, x)?;
    let r = sqrt_psd(m.state(), RANK_TOL)?;
    let c = Hermitian::symmetrize(CMat::commutator(x[0].as_mat(), x[1].as_mat()).scale(I));
    Ok(c.congruence(r.as_mat()))
}

/// tr S(X² + Y²) + trabs(i√S[X, Y]√S).
pub fn nagaoka_function(m: &StatisticalModel, x: &[Hermitian]) -> Result<f64> {
    require_two(m)?;
    let first = sld_function(m, x)?;
    let c = Hermitian::symmetrize(CMat::commutator(x[0].as_mat(), x[1].as_mat()).scale(I));
    Ok(first + sandwich_trabs(m.state(), &c)?)
}

/// Whether the Nagaoka and Holevo functions coincide at `x`:
/// `(flag, tr A₊, tr A₋)` with the flag set when the smaller trace is
/// at most 1e-8.
pub fn equality_condition(m: &StatisticalModel, x: &[Hermitian]) -> Result<(bool, f64, f64)> {
    let a = a_matrix(m, x)?;
    let (p, q) = pos_neg_split(&a)?;
    let (tp, tq) = (p.tr(), q.tr());
    Ok((tp.min(tq) <= 1e-8, tp, tq))
}

/// Largest violation of tr(S X_i) = 0 and tr(S_j X_i) = δ_ij.
pub fn unbiasedness_residual(m: &StatisticalModel, x: &[Hermitian]) -> f64 {
    let mut worst = 0.0f64;
    for (i, xi) in x.iter().enumerate() {
        worst = worst.max(m.state().dot(xi).abs());
        for (j, sj) in m.derivs().iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((sj.dot(xi) - want).abs());
        }
    }
    worst
}

/// SLD bound tr(W J⁻¹) with its optimizer.
pub fn sld_bound(m: &StatisticalModel, w: &WeightMatrix) -> Result<BoundResult> {
    w.check_arity(m.n_params())?;
    let set = sld_operators(m)?;
    let inv = set.fisher_inverse()?;
    let value = w.data().iter().zip(&inv).map(|(a, b)| a * b).sum();
    let optimizer = sld_optimizer(&set)?;
    let residual = unbiasedness_residual(m, &optimizer);
    Ok(BoundResult {
        kind: BoundKind::Sld,
        value,
        optimizer,
        copies: m.copies(),
        diagnostics: Diagnostics {
            status: Status::Optimal,
            relative_gap: 0.0,
            iterations: 0,
            primal_objective: value,
            dual_objective: value,
            unbiasedness_residual: residual,
        },
    })
}

/// Closed-form two-parameter qubit Nagaoka bound (tr J^{-1/2})².
pub fn gill_massar_ncrb(m: &StatisticalModel) -> Result<f64> {
    require_two(m)?;
    if m.dim() != 2 {
        return Err(Error::WrongDim { expected: 2, found: m.dim() });
    }
    let set = sld_operators(m)?;
    let r = crate::linalg::sym_fn(&set.fisher, 2, |x| 1.0 / x.sqrt())?;
    let t = r[0] + r[3];
    Ok(t * t)
}

/// Mean-square-error matrix of a measurement with per-outcome estimate
/// deviations θ̂(k) − θ.
#[derive(Clone, Debug)]
pub struct MseReport {
    /// Row-major n×n.
    pub matrix: Vec<f64>,
    /// Largest violation of Σ_k dev_i(k) tr(S Π_k) = 0 and
    /// Σ_k dev_i(k) tr(S_j Π_k) = δ_ij.
    pub unbiasedness_residual: f64,
}

pub const POVM_TOL: f64 = 1e-8;

pub fn mse_matrix(povm: &[Hermitian], deviations: &[Vec<f64>], m: &StatisticalModel) -> Result<MseReport> {
    let d = m.dim();
    let n = m.n_params();
    if povm.len() != deviations.len() {
        return Err(Error::Shape("one deviation vector per POVM outcome is required".into()));
    }
    let mut sum = CMat::zeros(d, d);
    for (k, p) in povm.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::WrongDim { expected: d, found: p.dim() });
        }
        if deviations[k].len() != n {
            return Err(Error::WrongArity { expected: n, found: deviations[k].len() });
        }
        if deviations[k].iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite estimate".into()));
        }
        let lmin = crate::linalg::eigh(p)?.values[0];
        if lmin < -POVM_TOL {
            return Err(Error::NotPsd { eig: lmin, tol: POVM_TOL });
        }
        sum += p.as_mat();
    }
    let defect = (&sum - &CMat::identity(d)).max_abs();
    if defect > POVM_TOL {
        return Err(Error::PovmIncomplete(defect));
    }
    let probs: Vec<f64> = povm.iter().map(|p| m.state().dot(p)).collect();
    let mut matrix = vec![0.0; n * n];
    for (dev, &pk) in deviations.iter().zip(&probs) {
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] += dev[i] * dev[j] * pk;
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        let mean: f64 = deviations.iter().zip(&probs).map(|(dv, p)| dv[i] * p).sum();
        worst = worst.max(mean.abs());
        for (j, sj) in m.derivs().iter().enumerate() {
            let g: f64 = deviations.iter().zip(povm).map(|(dv, p)| dv[i] * sj.dot(p)).sum();
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(MseReport { matrix, unbiasedness_residual: worst })
}

/// Dispatch to the routine for `kind`.
pub fn compute(kind: BoundKind, m: &StatisticalModel, w: &WeightMatrix, settings: &crate::sdp::SolverSettings) -> Result<BoundResult> {
    match kind {
        BoundKind::Sld => sld_bound(m, w),
        BoundKind::Holevo => hcrb(m, w, settings),
        BoundKind::Nagaoka => ncrb(m, w, settings),
        BoundKind::NagaokaHayashi => nhcrb(m, w, settings),
    }
}
