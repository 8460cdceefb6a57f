//! Conic-program encodings of the optimized bounds.
//!
//! All programs work in the support-first eigenbasis of S. An estimator
//! X_i is parameterized by its quotient-basis coordinates, and only the
//! support rows of √S X_i enter the PSD blocks.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::{check_estimators, require_two, unbiasedness_residual, BoundKind, BoundResult, Diagnostics};
use crate::error::{Error, Result};
use crate::linalg::{CMat, Hermitian, C64, I, ONE};
use crate::model::{quotient_basis, reparameterize, QuotientBasis, StatisticalModel, WeightMatrix};
use crate::sdp::{diag_index, off_index, solve, ConicProgram, ConicSolution, Field, SolverSettings, Status};

const SQRT2: f64 = core::f64::consts::SQRT_2;
const FRAC_1_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;

struct Setup {
    qb: QuotientBasis,
    /// Quotient elements per estimator.
    k: usize,
    r: usize,
    d: usize,
    n: usize,
    /// Non-zero entries (a, b, value) of √S Q_k on the support rows a < r.
    fq: Vec<Vec<(usize, usize, C64)>>,
}

impl Setup {
    fn new(m: &StatisticalModel) -> Result<Setup> {
        let qb = quotient_basis(m)?;
        let r = qb.support.rank;
        let d = m.dim();
        let sl: Vec<f64> = qb.support.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        let fq = qb
            .elements
            .iter()
            .map(|el| el.entries().into_iter().filter(|&(a, _, _)| a < r).map(|(a, b, v)| (a, b, v * sl[a])).collect())
            .collect();
        Ok(Setup { k: qb.len(), r, d, n: m.n_params(), fq, qb })
    }

    #[inline]
    fn xvar(&self, x0: usize, i: usize, kk: usize) -> usize {
        x0 + i * self.k + kk
    }

    /// tr(S X_i) = 0 and tr(S_j X_i) = δ_ij on the quotient coordinates.
    fn add_unbiasedness(&self, p: &mut ConicProgram, m: &StatisticalModel, x0: usize) {
        let s0 = self.qb.coordinates(m.state());
        let cj: Vec<Vec<f64>> = m.derivs().iter().map(|s| self.qb.coordinates(s)).collect();
        let sparse = |c: &[f64], i: usize| -> Vec<(usize, f64)> {
            c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(kk, &v)| (self.xvar(x0, i, kk), v)).collect()
        };
        for i in 0..self.n {
            p.add_equality(sparse(&s0, i), 0.0);
            for (j, c) in cj.iter().enumerate() {
                p.add_equality(sparse(c, i), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    fn extract(&self, sol: &ConicSolution, x0: usize) -> Vec<Hermitian> {
        (0..self.n).map(|i| self.qb.combine(&sol.x[x0 + i * self.k..x0 + (i + 1) * self.k])).collect()
    }

    /// (√S X)[support rows, :] in the eigenbasis.
    fn support_rows(&self, x: &Hermitian) -> CMat {
        let e = self.qb.support.to_eigenbasis(x);
        let sl: Vec<f64> = self.qb.support.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        CMat::from_fn(self.r, self.d, |a, b| e[(a, b)] * sl[a])
    }
}

/// Orthonormal basis of k×k Hermitian matrices as entry lists, flagged by
/// whether the element is diagonal.
fn hermitian_elements(k: usize) -> Vec<(Vec<(usize, usize, C64)>, bool)> {
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        out.push((vec![(a, a, ONE)], true));
    }
    for a in 0..k {
        for b in a + 1..k {
            out.push((vec![(a, b, ONE * FRAC_1_SQRT2), (b, a, ONE * FRAC_1_SQRT2)], false));
            out.push((vec![(a, b, I * FRAC_1_SQRT2), (b, a, -I * FRAC_1_SQRT2)], false));
        }
    }
    out
}

/// Place a Hermitian basis element at block offset (r0, c0). On a
/// diagonal block only the upper entries are written; the mirror is
/// implied by the Hermitian block.
fn place(p: &mut ConicProgram, blk: usize, var: usize, r0: usize, c0: usize, entries: &[(usize, usize, C64)]) {
    for &(a, b, v) in entries {
        if r0 == c0 && a > b {
            continue;
        }
        p.add_coeff(blk, var, r0 + a, c0 + b, v);
    }
}

fn diagnostics(sol: &ConicSolution, residual: f64) -> Diagnostics {
    Diagnostics {
        status: sol.status,
        relative_gap: sol.relative_gap,
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        unbiasedness_residual: residual,
    }
}

fn result(kind: BoundKind, m: &StatisticalModel, sol: &ConicSolution, optimizer: Vec<Hermitian>) -> BoundResult {
    let residual = unbiasedness_residual(m, &optimizer);
    BoundResult { kind, value: sol.primal_objective, optimizer, copies: m.copies(), diagnostics: diagnostics(sol, residual) }
}

/// Holevo bound: min tr(W V) over real symmetric V and locally unbiased X
/// with [[V, F†], [F, I]] ⪰ 0, where column i of F is the vectorized
/// support rows of √S X_i, so F†F = Z[X].
pub fn hcrb(m: &StatisticalModel, w: &WeightMatrix, settings: &SolverSettings) -> Result<BoundResult> {
    w.check_arity(m.n_params())?;
    let st = Setup::new(m)?;
    let (p, x0) = hcrb_program(m, w, &st);
    let sol = solve(&p, settings)?;
    let opt = st.extract(&sol, x0);
    Ok(result(BoundKind::Holevo, m, &sol, opt))
}

fn hcrb_program(m: &StatisticalModel, w: &WeightMatrix, st: &Setup) -> (ConicProgram, usize) {
    let n = m.n_params();
    let (r, d, k) = (st.r, st.d, st.k);
    let nv = n * (n + 1) / 2;
    let x0 = nv;
    let mut p = ConicProgram::new(nv + n * k);
    let blk = p.add_block(n + r * d, Field::Complex);
    let mut v = 0;
    for q in 0..n {
        for pp in 0..=q {
            if pp == q {
                p.add_coeff(blk, v, q, q, ONE);
                p.c[v] = w.at(q, q);
            } else {
                p.add_coeff(blk, v, pp, q, ONE * FRAC_1_SQRT2);
                p.c[v] = SQRT2 * w.at(pp, q);
            }
            v += 1;
        }
    }
    for row in 0..r * d {
        p.add_constant(blk, n + row, n + row, ONE);
    }
    for i in 0..n {
        for kk in 0..k {
            let var = st.xvar(x0, i, kk);
            for &(a, b, val) in &st.fq[kk] {
                p.add_coeff(blk, var, n + a * d + b, i, val);
            }
        }
    }
    st.add_unbiasedness(&mut p, m, x0);
    (p, x0)
}

/// Builds min Σ_ij W_ij tr V_ij subject to [[𝕍, F̂], [F̂†, I_d]] ⪰ 0 with
/// block-symmetric 𝕍 (V_ij = V_ji Hermitian r×r). F̂ is either the free
/// estimator (`fixed = None`) or a constant.
fn nh_program(m: &StatisticalModel, w: &WeightMatrix, st: &Setup, fixed: Option<&[Hermitian]>) -> (ConicProgram, usize) {
    let (n, r, d, k) = (st.n, st.r, st.d, st.k);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let els = hermitian_elements(r);
    let r2 = r * r;
    let x0 = pairs.len() * r2;
    let nx = if fixed.is_some() { 0 } else { n * k };
    let mut p = ConicProgram::new(x0 + nx);
    let blk = p.add_block(n * r + d, Field::Complex);
    for (pi, &(i, j)) in pairs.iter().enumerate() {
        for (e, (entries, diag)) in els.iter().enumerate() {
            let var = pi * r2 + e;
            place(&mut p, blk, var, i * r, j * r, entries);
            if *diag {
                p.c[var] = w.at(i, j) * if i == j { 1.0 } else { 2.0 };
            }
        }
    }
    for b in 0..d {
        p.add_constant(blk, n * r + b, n * r + b, ONE);
    }
    match fixed {
        Some(x) => {
            for (i, xi) in x.iter().enumerate() {
                let f = st.support_rows(xi);
                for a in 0..r {
                    for b in 0..d {
                        if f[(a, b)] != C64::new(0.0, 0.0) {
                            p.add_constant(blk, i * r + a, n * r + b, f[(a, b)]);
                        }
                    }
                }
            }
        }
        None => {
            for i in 0..n {
                for kk in 0..k {
                    let var = st.xvar(x0, i, kk);
                    for &(a, b, val) in &st.fq[kk] {
                        p.add_coeff(blk, var, i * r + a, n * r + b, val);
                    }
                }
            }
            st.add_unbiasedness(&mut p, m, x0);
        }
    }
    (p, x0)
}

/// Nagaoka–Hayashi bound for any number of parameters.
pub fn nhcrb(m: &StatisticalModel, w: &WeightMatrix, settings: &SolverSettings) -> Result<BoundResult> {
    w.check_arity(m.n_params())?;
    let st = Setup::new(m)?;
    let (p, x0) = nh_program(m, w, &st, None);
    let sol = solve(&p, settings)?;
    let opt = st.extract(&sol, x0);
    Ok(result(BoundKind::NagaokaHayashi, m, &sol, opt))
}

/// The inner minimization over 𝕃 of the Nagaoka–Hayashi function at fixed
/// estimators.
pub fn nh_function(m: &StatisticalModel, x: &[Hermitian], w: &WeightMatrix, settings: &SolverSettings) -> Result<f64> {
    check_estimators(m, x)?;
    w.check_arity(m.n_params())?;
    let st = Setup::new(m)?;
    let (p, _) = nh_program(m, w, &st, Some(x));
    let sol = solve(&p, settings)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(sol.status.as_str()));
    }
    Ok(sol.primal_objective)
}

/// Split of the Nagaoka–Hayashi function into tr(W Re Z[X]) and the
/// antisymmetric-part term: min tr 𝕍 over PSD 𝕍 with a(𝕍) = −𝔸, where a
/// takes the block antisymmetric part and
/// 𝔸 = (W^{1/2} ⊗ √S) a(XXᵀ) (W^{1/2} ⊗ √S) on the support.
pub fn nh_split(m: &StatisticalModel, x: &[Hermitian], w: &WeightMatrix, settings: &SolverSettings) -> Result<(f64, f64)> {
    check_estimators(m, x)?;
    let n = m.n_params();
    w.check_arity(n)?;
    let z = super::z_matrix(m, x)?;
    let first: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| w.at(i, j) * z[(j, i)].re).sum();
    if n < 2 {
        return Ok((first, 0.0));
    }
    let st = Setup::new(m)?;
    let r = st.r;
    let sd = &st.qb.support;
    let sl: Vec<f64> = sd.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let xe: Vec<CMat> = x.iter().map(|xi| sd.to_eigenbasis(xi).into_mat()).collect();
    // C_kl = √S [X_k, X_l] √S on the support block.
    let comm = |k: usize, l: usize| -> CMat {
        let c = CMat::commutator(&xe[k], &xe[l]);
        CMat::from_fn(r, r, |a, b| c[(a, b)] * (sl[a] * sl[b]))
    };
    let rw = w.sqrt()?;
    let mut cs = vec![CMat::zeros(r, r); n * n];
    for kk in 0..n {
        for l in 0..n {
            if kk != l {
                cs[kk * n + l] = comm(kk, l);
            }
        }
    }
    let aa = |i: usize, j: usize| -> CMat {
        let mut acc = CMat::zeros(r, r);
        for kk in 0..n {
            for l in 0..n {
                let f = rw[i * n + kk] * rw[l * n + j] * 0.5;
                if f != 0.0 && kk != l {
                    acc += &cs[kk * n + l].scale_real(f);
                }
            }
        }
        acc
    };
    let dim = n * r;
    let len = dim * dim;
    let mut p = ConicProgram::new(len);
    let blk = p.add_block(dim, Field::Complex);
    for kk in 0..len {
        p.blocks[blk].coeffs[kk].push((kk, 1.0));
    }
    for q in 0..dim {
        p.c[diag_index(q, Field::Complex)] = 1.0;
    }
    for i in 0..n {
        for j in i + 1..n {
            let a_ij = aa(i, j);
            for a in 0..r {
                let (pp, qq) = (i * r + a, j * r + a);
                let k0 = off_index(pp, qq, Field::Complex);
                p.add_equality(vec![(k0 + 1, SQRT2)], -2.0 * a_ij[(a, a)].im);
                for b in a + 1..r {
                    let k1 = off_index(i * r + a, j * r + b, Field::Complex);
                    let k2 = off_index(i * r + b, j * r + a, Field::Complex);
                    let v = a_ij[(a, b)];
                    p.add_equality(vec![(k1, FRAC_1_SQRT2), (k2, -FRAC_1_SQRT2)], -2.0 * v.re);
                    p.add_equality(vec![(k1 + 1, FRAC_1_SQRT2), (k2 + 1, FRAC_1_SQRT2)], -2.0 * v.im);
                }
            }
        }
    }
    let sol = solve(&p, settings)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(sol.status.as_str()));
    }
    Ok((first, sol.primal_objective))
}

/// Nagaoka bound for two parameters. A general weight is absorbed by
/// reparameterization first.
///
/// Encoding: with G₁ = (F_X + iF_Y)/√2 and G₂ = (F_X − iF_Y)/√2 (support
/// rows of √S X, √S Y), minimize 2 tr A over Hermitian A and complex B
/// subject to [[A, B, G₁], [B†, A, G₂], [G₁†, G₂†, I]] ⪰ 0. The diagonal
/// blocks see ½(T ∓ A(X)) with T = √S(X² + Y²)√S, and minimizing over the
/// shared A and free B yields tr S(X² + Y²) + trabs(A(X)).
pub fn ncrb(m: &StatisticalModel, w: &WeightMatrix, settings: &SolverSettings) -> Result<BoundResult> {
    require_two(m)?;
    w.check_arity(2)?;
    if !w.is_identity() {
        let mr = reparameterize(m, w)?;
        let mut res = ncrb(&mr, &WeightMatrix::identity(2), settings)?;
        // X = W^{-1/2} X' maps the reparameterized optimizer back.
        let t = w.inv_sqrt()?;
        let back: Vec<Hermitian> = (0..2)
            .map(|i| res.optimizer[0].scale(t[i * 2]).add(&res.optimizer[1].scale(t[i * 2 + 1])))
            .collect();
        res.diagnostics.unbiasedness_residual = unbiasedness_residual(m, &back);
        res.optimizer = back;
        return Ok(res);
    }
    let st = Setup::new(m)?;
    let (p, x0) = ncrb_program(m, &st);
    let sol = solve(&p, settings)?;
    let opt = st.extract(&sol, x0);
    Ok(result(BoundKind::Nagaoka, m, &sol, opt))
}

fn ncrb_program(m: &StatisticalModel, st: &Setup) -> (ConicProgram, usize) {
    let (r, d, k) = (st.r, st.d, st.k);
    let els = hermitian_elements(r);
    let r2 = r * r;
    // Variables: A (r²), B real and imaginary parts (2r²), then X and Y.
    let b0 = r2;
    let x0 = 3 * r2;
    let mut p = ConicProgram::new(x0 + 2 * k);
    let blk = p.add_block(2 * r + d, Field::Complex);
    for (e, (entries, diag)) in els.iter().enumerate() {
        place(&mut p, blk, e, 0, 0, entries);
        place(&mut p, blk, e, r, r, entries);
        if *diag {
            p.c[e] = 2.0;
        }
    }
    for a in 0..r {
        for b in 0..r {
            let v = b0 + 2 * (a * r + b);
            p.add_coeff(blk, v, a, r + b, ONE);
            p.add_coeff(blk, v + 1, a, r + b, I);
        }
    }
    for b in 0..d {
        p.add_constant(blk, 2 * r + b, 2 * r + b, ONE);
    }
    for kk in 0..k {
        for &(a, b, val) in &st.fq[kk] {
            let g = val * FRAC_1_SQRT2;
            let (vx, vy) = (st.xvar(x0, 0, kk), st.xvar(x0, 1, kk));
            p.add_coeff(blk, vx, a, 2 * r + b, g);
            p.add_coeff(blk, vy, a, 2 * r + b, g * I);
            p.add_coeff(blk, vx, r + a, 2 * r + b, g);
            p.add_coeff(blk, vy, r + a, 2 * r + b, -(g * I));
        }
    }
    st.add_unbiasedness(&mut p, m, x0);
    (p, x0)
}

/// The conic program solved for an optimized bound, for export to external
/// solvers. The Nagaoka program with a non-identity weight is that of the
/// reparameterized model.
pub fn bound_program(kind: BoundKind, m: &StatisticalModel, w: &WeightMatrix) -> Result<ConicProgram> {
    w.check_arity(m.n_params())?;
    match kind {
        BoundKind::Sld => Err(Error::Domain("the SLD bound is closed-form and has no program".into())),
        BoundKind::Holevo => Ok(hcrb_program(m, w, &Setup::new(m)?).0),
        BoundKind::NagaokaHayashi => Ok(nh_program(m, w, &Setup::new(m)?, None).0),
        BoundKind::Nagaoka => {
            require_two(m)?;
            if w.is_identity() {
                Ok(ncrb_program(m, &Setup::new(m)?).0)
            } else {
                let mr = reparameterize(m, w)?;
                Ok(ncrb_program(&mr, &Setup::new(&mr)?).0)
            }
        }
    }
}

/// min tr(W V) over real symmetric V with V ⪰ G for a Hermitian n×n G.
/// Equals tr(W Re G) + trabs(√W Im G √W); the Holevo program relies on it.
pub fn min_trace_dominating(g: &Hermitian, w: &WeightMatrix, settings: &SolverSettings) -> Result<f64> {
    let n = g.dim();
    w.check_arity(n)?;
    let mut p = ConicProgram::new(n * (n + 1) / 2);
    let blk = p.add_block(n, Field::Complex);
    let mut v = 0;
    for q in 0..n {
        for pp in 0..=q {
            if pp == q {
                p.add_coeff(blk, v, q, q, ONE);
                p.c[v] = w.at(q, q);
            } else {
                p.add_coeff(blk, v, pp, q, ONE * FRAC_1_SQRT2);
                p.c[v] = SQRT2 * w.at(pp, q);
            }
            v += 1;
        }
    }
    for q in 0..n {
        for pp in 0..=q {
            p.add_constant(blk, pp, q, -g.as_mat()[(pp, q)]);
        }
    }
    let sol = solve(&p, settings)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(sol.status.as_str()));
    }
    Ok(sol.primal_objective)
}
