//! Homogeneous self-dual primal-dual interior-point method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector.
//!
//! Internally the program is held in the standard form
//! `min cᵀx  s.t.  Ax = b,  Gx + s = h,  s ⪰ 0`, with `G = -coeffs` and
//! `h = constant`. The dual is `max -bᵀy - hᵀz  s.t.  Aᵀy + Gᵀz + c = 0,
//! z ⪰ 0`.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use num_traits::{Float, Zero};

use super::cone::{diag_index, identity_vec, vec_len, write_vec};
use super::dense::{chol_solve, cholesky_in_place, dot, forward_solve, independent_rows, norm, Lu, Sq};
use super::{mat_of, ConicProgram, ConicSolution, Field, SolverSettings, Status};
use crate::error::Result;
use crate::linalg::{cholesky, eigh, jacobi_svd, CMat, Hermitian, C64, ZERO};

const SQRT2: f64 = core::f64::consts::SQRT_2;
const PRESOLVE_TOL: f64 = 1e-10;
const MIN_STEP: f64 = 1e-12;
const REFINE_STEPS: usize = 6;
const REFINE_TOL: f64 = 1e-12;
const REFINE_PASSES: usize = 3;

/// Diagnostics for one interior-point iteration.
#[derive(Clone, Debug)]
pub struct IterStats {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// sᵀz/τ² at the normalized iterate.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Bound on how far `primal - dual` may fall below zero given the
    /// current residuals: `primal - dual >= -duality_slack`.
    pub duality_slack: f64,
    pub step: f64,
}

struct Block {
    dim: usize,
    field: Field,
    offset: usize,
    len: usize,
    /// Columns of G restricted to this block as matrix entries grouped by
    /// row: for each variable, rows p with (q, value) pairs.
    entries: Vec<(usize, Vec<(usize, Vec<(usize, C64)>)>)>,
}

struct Scaling {
    r: CMat,
    rinv: CMat,
    lambda: Vec<f64>,
}

struct Problem {
    n: usize,
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    h: Vec<f64>,
    /// Sparse columns of G over the stacked cone coordinates.
    gcols: Vec<Vec<(usize, f64)>>,
    /// Coordinate range [lo, hi) covering every block a variable enters.
    spans: Vec<(usize, usize)>,
    blocks: Vec<Block>,
    m: usize,
    degree: usize,
}

impl Problem {
    fn g_mul(&self, x: &[f64], out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = 0.0;
        }
        for (j, col) in self.gcols.iter().enumerate() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for &(k, g) in col {
                out[k] += g * xj;
            }
        }
    }
    fn gt_mul(&self, z: &[f64]) -> Vec<f64> {
        self.gcols.iter().map(|col| col.iter().map(|&(k, g)| g * z[k]).sum()).collect()
    }
    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }
    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (row, &yi) in self.a.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o += r * yi;
            }
        }
        out
    }
}

fn build(p: &ConicProgram, kept: &[usize]) -> Problem {
    let n = p.n_vars;
    let a: Vec<Vec<f64>> = kept
        .iter()
        .map(|&i| {
            let mut row = vec![0.0; n];
            for &(j, v) in &p.eq_rows[i] {
                row[j] += v;
            }
            row
        })
        .collect();
    let b: Vec<f64> = kept.iter().map(|&i| p.eq_rhs[i]).collect();
    let mut blocks = Vec::new();
    let mut h = Vec::new();
    let mut gcols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut offset = 0;
    let mut degree = 0;
    for blk in &p.blocks {
        let len = blk.vec_len();
        h.extend_from_slice(&blk.constant);
        let mut entries = Vec::new();
        for (j, col) in blk.coeffs.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let mut dense = vec![0.0; len];
            for &(k, v) in col {
                dense[k] -= v;
            }
            for (k, &v) in dense.iter().enumerate() {
                if v != 0.0 {
                    gcols[j].push((offset + k, v));
                }
            }
            entries.push((j, group_entries(&mat_of(&dense, blk.dim, blk.field))));
        }
        blocks.push(Block { dim: blk.dim, field: blk.field, offset, len, entries });
        offset += len;
        degree += blk.dim;
    }
    let spans = (0..n)
        .map(|j| {
            let mut lo = usize::MAX;
            let mut hi = 0;
            for blk in &blocks {
                if blk.entries.iter().any(|(v, _)| *v == j) {
                    lo = lo.min(blk.offset);
                    hi = hi.max(blk.offset + blk.len);
                }
            }
            if lo > hi { (0, 0) } else { (lo, hi) }
        })
        .collect();
    Problem { n, c: p.c.clone(), a, b, h, gcols, spans, blocks, m: offset, degree }
}

fn group_entries(m: &Hermitian) -> Vec<(usize, Vec<(usize, C64)>)> {
    let k = m.dim();
    let mut out = Vec::new();
    for p in 0..k {
        let row: Vec<(usize, C64)> = (0..k).filter(|&q| !m[(p, q)].is_zero()).map(|q| (q, m[(p, q)])).collect();
        if !row.is_empty() {
            out.push((p, row));
        }
    }
    out
}

fn block_mat(v: &[f64], blk: &Block) -> Hermitian {
    mat_of(&v[blk.offset..blk.offset + blk.len], blk.dim, blk.field)
}

fn put_block(m: &CMat, blk: &Block, out: &mut [f64]) {
    write_vec(m, blk.field, &mut out[blk.offset..blk.offset + blk.len]);
}

/// NT scaling between two interior points s, z of one block:
/// R with Rᴴ z R = R⁻¹ s R⁻ᴴ = diag(λ).
fn nt_scaling(s: &CMat, z: &CMat) -> Option<Scaling> {
    let ls = cholesky(s).ok()?;
    let lz = cholesky(z).ok()?;
    let prod = lz.adjoint_mul(&ls);
    let svd = jacobi_svd(&prod).ok()?;
    let k = s.rows();
    if svd.sigma.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return None;
    }
    let isq: Vec<f64> = svd.sigma.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut r = ls.matmul(&svd.v);
    for i in 0..k {
        for j in 0..k {
            r[(i, j)] *= isq[j];
        }
    }
    let mut rinv = svd.u.adjoint().matmul(&lz.adjoint());
    for i in 0..k {
        for j in 0..k {
            rinv[(i, j)] *= isq[i];
        }
    }
    Some(Scaling { r, rinv, lambda: svd.sigma })
}

impl Scaling {
    /// W⁻ᵀ u = R⁻¹ U R⁻ᴴ.
    fn winv_t(&self, u: &CMat) -> CMat {
        self.rinv.matmul(u).matmul(&self.rinv.adjoint())
    }
}

/// λ ⋄ U: the inverse of U ↦ λ∘U = (ΛU + UΛ)/2.
fn lambda_div(l: &[f64], u: &CMat) -> CMat {
    CMat::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * (2.0 / (l[i] + l[j])))
}

fn jordan(a: &CMat, b: &CMat) -> CMat {
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    (&ab + &ba).scale_real(0.5)
}

/// Largest α with λ + α D ⪰ 0 (infinite if D ⪰ 0).
fn block_max_step(l: &[f64], d: &CMat) -> f64 {
    let k = l.len();
    let isq: Vec<f64> = l.iter().map(|x| 1.0 / x.sqrt()).collect();
    let m = CMat::from_fn(k, k, |i, j| d[(i, j)] * (isq[i] * isq[j]));
    let m = Hermitian::symmetrize(m);
    match eigh(&m) {
        Ok(e) => {
            let lmin = e.values[0];
            if lmin < 0.0 {
                -1.0 / lmin
            } else {
                f64::INFINITY
            }
        }
        Err(_) => 0.0,
    }
}

/// Reduced KKT system [[ĜᵀĜ, Aᵀ], [A, 0]] factored by Cholesky of the
/// (lightly regularized) Gram block and of the Schur complement A P⁻¹ Aᵀ.
struct Kkt<'a> {
    prob: &'a Problem,
    ghat: Vec<Vec<f64>>,
    lp: Sq,
    ls: Sq,
    lu: OnceCell<Option<Lu>>,
}

impl<'a> Kkt<'a> {
    fn new(prob: &'a Problem, ghat: Vec<Vec<f64>>) -> Kkt<'a> {
        let n = prob.n;
        let mut p = Sq::zeros(n);
        for i in 0..n {
            let (lo_i, hi_i) = prob.spans[i];
            for j in 0..=i {
                let (lo_j, hi_j) = prob.spans[j];
                let (lo, hi) = (lo_i.max(lo_j), hi_i.min(hi_j));
                let v = if lo < hi { dot(&ghat[i][lo..hi], &ghat[j][lo..hi]) } else { 0.0 };
                p.set(i, j, v);
                p.set(j, i, v);
            }
        }
        let maxdiag = (0..n).map(|i| p.at(i, i)).fold(0.0, f64::max).max(1e-300);
        let mut lp = p;
        for i in 0..n {
            let v = lp.at(i, i) + 1e-14 * maxdiag;
            lp.set(i, i, v);
        }
        cholesky_in_place(&mut lp, 1e-28 * maxdiag);
        // Schur complement A P⁻¹ Aᵀ = (L⁻¹Aᵀ)ᵀ(L⁻¹Aᵀ).
        let w: Vec<Vec<f64>> = prob
            .a
            .iter()
            .map(|row| {
                let mut t = row.clone();
                forward_solve(&lp, &mut t);
                t
            })
            .collect();
        let np = prob.a.len();
        let mut ls = Sq::zeros(np);
        for i in 0..np {
            for j in 0..=i {
                let v = dot(&w[i], &w[j]);
                ls.set(i, j, v);
                ls.set(j, i, v);
            }
        }
        let maxs = (0..np).map(|i| ls.at(i, i)).fold(0.0, f64::max).max(1e-300);
        cholesky_in_place(&mut ls, 1e-28 * maxs);
        Kkt { prob, ghat, lp, ls, lu: OnceCell::new() }
    }

    fn approx_inverse(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut t = f.to_vec();
        chol_solve(&self.lp, &mut t);
        let np = self.prob.a.len();
        if np == 0 {
            return (t, Vec::new());
        }
        let mut v: Vec<f64> = (0..np).map(|i| dot(&self.prob.a[i], &t) - g[i]).collect();
        chol_solve(&self.ls, &mut v);
        let atv = self.prob.at_mul(&v);
        let mut u: Vec<f64> = f.iter().zip(&atv).map(|(a, b)| a - b).collect();
        chol_solve(&self.lp, &mut u);
        (u, v)
    }

    fn gram_mul(&self, u: &[f64]) -> Vec<f64> {
        let gu = self.ghat_mul(u);
        self.ghat.iter().map(|row| dot(row, &gu)).collect()
    }

    fn ghat_mul(&self, u: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.prob.m];
        for (row, &uj) in self.ghat.iter().zip(u) {
            if uj == 0.0 {
                continue;
            }
            for (wk, &g) in w.iter_mut().zip(row) {
                *wk += g * uj;
            }
        }
        w
    }

    /// LU of the full augmented system, which avoids squaring the
    /// conditioning of Ĝ.
    fn augmented(&self) -> Option<&Lu> {
        self.lu
            .get_or_init(|| {
                let (n, np, m) = (self.prob.n, self.prob.a.len(), self.prob.m);
                let size = n + np + m;
                let mut k = Sq::zeros(size);
                for (i, row) in self.prob.a.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        k.set(n + i, j, v);
                        k.set(j, n + i, v);
                    }
                }
                for (j, row) in self.ghat.iter().enumerate() {
                    for (c, &v) in row.iter().enumerate() {
                        k.set(n + np + c, j, v);
                        k.set(j, n + np + c, v);
                    }
                }
                for c in 0..m {
                    k.set(n + np + c, n + np + c, -1.0);
                }
                Lu::new(k)
            })
            .as_ref()
    }

    /// Solve K̂ [u; v; w] = [r1; r2; r3] in scaled coordinates.
    fn solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.prob.n;
        let f: Vec<f64> = (0..n).map(|j| r1[j] + dot(&self.ghat[j], r3)).collect();
        let (mut u, mut v) = self.approx_inverse(&f, r2);
        let residual = |u: &[f64], v: &[f64]| {
            let pu = self.gram_mul(u);
            let atv = self.prob.at_mul(v);
            let res1: Vec<f64> = (0..n).map(|j| f[j] - pu[j] - atv[j]).collect();
            let au = self.prob.a_mul(u);
            let res2: Vec<f64> = r2.iter().zip(&au).map(|(a, b)| a - b).collect();
            let scale = norm(&f) + norm(r2) + norm(&pu) + norm(&atv) + 1e-300;
            (res1, res2, scale)
        };
        let mut converged = false;
        for _ in 0..REFINE_STEPS {
            let (res1, res2, scale) = residual(&u, &v);
            if norm(&res1) + norm(&res2) <= REFINE_TOL * scale {
                converged = true;
                break;
            }
            let (du, dv) = self.approx_inverse(&res1, &res2);
            for (a, b) in u.iter_mut().zip(&du) {
                *a += b;
            }
            for (a, b) in v.iter_mut().zip(&dv) {
                *a += b;
            }
        }
        if !converged {
            let (res1, res2, scale) = residual(&u, &v);
            if norm(&res1) + norm(&res2) > REFINE_TOL * scale {
                if let Some(lu) = self.augmented() {
                    let rhs: Vec<f64> = r1.iter().chain(r2).chain(r3).copied().collect();
                    let mut sol = lu.solve(&rhs);
                    let np = self.prob.a.len();
                    // One refinement pass on the augmented system.
                    let (ru, rv, rw) = (&sol[..n], &sol[n..n + np], &sol[n + np..]);
                    let gtw: Vec<f64> = self.ghat.iter().map(|row| dot(row, rw)).collect();
                    let atv = self.prob.at_mul(rv);
                    let au = self.prob.a_mul(ru);
                    let gu = self.ghat_mul(ru);
                    let mut res: Vec<f64> = (0..n).map(|j| r1[j] - atv[j] - gtw[j]).collect();
                    res.extend(r2.iter().zip(&au).map(|(a, b)| a - b));
                    res.extend((0..self.prob.m).map(|c| r3[c] - gu[c] + rw[c]));
                    let corr = lu.solve(&res);
                    for (a, b) in sol.iter_mut().zip(&corr) {
                        *a += b;
                    }
                    let w = sol.split_off(n + np);
                    let v = sol.split_off(n);
                    return (sol, v, w);
                }
            }
        }
        let mut w = self.ghat_mul(&u);
        for (wk, &r) in w.iter_mut().zip(r3) {
            *wk -= r;
        }
        (u, v, w)
    }
}

/// Rows of Ĝ = W⁻ᵀG: one dense vector over cone coordinates per variable.
fn scaled_g(prob: &Problem, sc: &[Scaling]) -> Vec<Vec<f64>> {
    let mut ghat = vec![vec![0.0; prob.m]; prob.n];
    for (blk, s) in prob.blocks.iter().zip(sc) {
        let k = blk.dim;
        let rih = s.rinv.adjoint();
        for (j, groups) in &blk.entries {
            // T = G_j R⁻ᴴ on the non-zero rows of G_j, then R⁻¹ T.
            let mut out = CMat::zeros(k, k);
            for (p, row) in groups {
                let mut t = vec![ZERO; k];
                for &(q, val) in row {
                    let rq = rih.row(q);
                    for (tc, &rv) in t.iter_mut().zip(rq) {
                        *tc += val * rv;
                    }
                }
                for i in 0..k {
                    let a = s.rinv[(i, *p)];
                    if a.is_zero() {
                        continue;
                    }
                    for c in i..k {
                        out[(i, c)] += a * t[c];
                    }
                }
            }
            put_upper(&out, blk, &mut ghat[*j]);
        }
    }
    ghat
}

/// Vectorize from the upper triangle only (lower entries may be unset).
fn put_upper(m: &CMat, blk: &Block, out: &mut [f64]) {
    let seg = &mut out[blk.offset..blk.offset + blk.len];
    for j in 0..blk.dim {
        for i in 0..j {
            let z = m[(i, j)];
            match blk.field {
                Field::Real => seg[super::cone::off_index(i, j, Field::Real)] = SQRT2 * z.re,
                Field::Complex => {
                    let k = super::cone::off_index(i, j, Field::Complex);
                    seg[k] = SQRT2 * z.re;
                    seg[k + 1] = SQRT2 * z.im;
                }
            }
        }
        seg[diag_index(j, blk.field)] = m[(j, j)].re;
    }
}

fn winv_t_vec(prob: &Problem, sc: &[Scaling], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; prob.m];
    for (blk, s) in prob.blocks.iter().zip(sc) {
        let m = s.winv_t(block_mat(v, blk).as_mat());
        put_block(&m, blk, &mut out);
    }
    out
}

fn max_step(prob: &Problem, sc: &[Scaling], ds: &[f64], dz: &[f64], tau: f64, dtau: f64, kappa: f64, dkappa: f64) -> f64 {
    let mut a = f64::INFINITY;
    for (blk, s) in prob.blocks.iter().zip(sc) {
        a = a.min(block_max_step(&s.lambda, block_mat(ds, blk).as_mat()));
        a = a.min(block_max_step(&s.lambda, block_mat(dz, blk).as_mat()));
    }
    if dtau < 0.0 {
        a = a.min(-tau / dtau);
    }
    if dkappa < 0.0 {
        a = a.min(-kappa / dkappa);
    }
    a
}

#[derive(Clone)]
struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    /// Scaled dual and slack directions.
    dz: Vec<f64>,
    ds: Vec<f64>,
    /// The same directions in unscaled coordinates.
    ds_u: Vec<f64>,
    dz_u: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

impl Direction {
    fn add(&mut self, o: &Direction) {
        for (a, b) in [(&mut self.dx, &o.dx), (&mut self.dy, &o.dy), (&mut self.dz, &o.dz), (&mut self.ds, &o.ds), (&mut self.ds_u, &o.ds_u), (&mut self.dz_u, &o.dz_u)] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.dtau += o.dtau;
        self.dkappa += o.dkappa;
    }
}

/// W d̃s = R D̃s Rᴴ and W⁻¹ d̃z = R⁻ᴴ D̃z R⁻¹ blockwise.
fn unscale_pair(prob: &Problem, sc: &[Scaling], ds: &[f64], dz: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut su = vec![0.0; prob.m];
    let mut zu = vec![0.0; prob.m];
    for (blk, s) in prob.blocks.iter().zip(sc) {
        let a = s.r.matmul(block_mat(ds, blk).as_mat()).matmul(&s.r.adjoint());
        put_block(&a, blk, &mut su);
        let b = s.rinv.adjoint().matmul(block_mat(dz, blk).as_mat()).matmul(&s.rinv);
        put_block(&b, blk, &mut zu);
    }
    (su, zu)
}

pub fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<ConicSolution> {
    program.validate()?;
    settings.validate()?;
    if program.blocks.is_empty() {
        return Err(crate::Error::Program("at least one PSD block is required".into()));
    }

    let n = program.n_vars;
    let dense_rows: Vec<Vec<f64>> = program
        .eq_rows
        .iter()
        .map(|r| {
            let mut row = vec![0.0; n];
            for &(j, v) in r {
                row[j] += v;
            }
            row
        })
        .collect();
    let (kept, inconsistency) = independent_rows(&dense_rows, &program.eq_rhs, PRESOLVE_TOL);
    let bscale = norm(&program.eq_rhs).max(1.0);
    let prob = build(program, &kept);
    if inconsistency > 1e-8 * bscale {
        return Ok(trivial_solution(program, Status::Infeasible));
    }

    let m = prob.m;
    let np = prob.a.len();
    let resx0 = norm(&prob.c).max(1.0);
    let resy0 = norm(&prob.b).max(1.0);
    let resz0 = norm(&prob.h).max(1.0);

    // Initial point from two least-squares solves with identity scaling.
    let ident: Vec<Scaling> = prob
        .blocks
        .iter()
        .map(|b| Scaling { r: CMat::identity(b.dim), rinv: CMat::identity(b.dim), lambda: vec![1.0; b.dim] })
        .collect();
    let kkt0 = Kkt::new(&prob, scaled_g(&prob, &ident));
    let (mut x, _, w) = kkt0.solve(&vec![0.0; n], &prob.b, &prob.h);
    let mut s: Vec<f64> = w.iter().map(|v| -v).collect();
    let negc: Vec<f64> = prob.c.iter().map(|v| -v).collect();
    let (_, mut y, mut z) = kkt0.solve(&negc, &vec![0.0; np], &vec![0.0; m]);
    drop(kkt0);

    let shift_into_cone = |v: &mut Vec<f64>, extra: f64| {
        let mut t = f64::NEG_INFINITY;
        for blk in &prob.blocks {
            if let Ok(e) = eigh(&block_mat(v, blk)) {
                t = t.max(-e.values[0]);
            }
        }
        let nv = norm(v).max(1.0);
        let shift = if t >= -1e-8 * nv { 1.0 + t } else { 0.0 } + extra;
        if shift != 0.0 {
            for blk in &prob.blocks {
                let id = identity_vec(blk.dim, blk.field);
                for (a, b) in v[blk.offset..blk.offset + blk.len].iter_mut().zip(&id) {
                    *a += shift * b;
                }
            }
        }
    };
    shift_into_cone(&mut s, settings.init_perturbation);
    shift_into_cone(&mut z, 2.0 * settings.init_perturbation);

    let mut sc: Vec<Scaling> = Vec::with_capacity(prob.blocks.len());
    for blk in &prob.blocks {
        match nt_scaling(block_mat(&s, blk).as_mat(), block_mat(&z, blk).as_mat()) {
            Some(w) => sc.push(w),
            None => return Ok(trivial_solution(program, Status::NumericalFailure)),
        }
    }
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let mut history = Vec::new();
    let mut status = Status::MaxIter;
    let mut iters = 0;
    let mut last = Summary::default();
    let mut gx = vec![0.0; m];

    for it in 0..=settings.max_iter {
        iters = it;
        // Residuals of the homogeneous embedding.
        let hrx: Vec<f64> = {
            let aty = prob.at_mul(&y);
            let gtz = prob.gt_mul(&z);
            aty.iter().zip(&gtz).map(|(a, b)| a + b).collect()
        };
        let rx: Vec<f64> = hrx.iter().zip(&prob.c).map(|(a, c)| a + c * tau).collect();
        let hry = prob.a_mul(&x);
        let ry: Vec<f64> = hry.iter().zip(&prob.b).map(|(a, b)| a - b * tau).collect();
        prob.g_mul(&x, &mut gx);
        let hrz: Vec<f64> = s.iter().zip(&gx).map(|(a, b)| a + b).collect();
        let rz: Vec<f64> = hrz.iter().zip(&prob.h).map(|(a, h)| a - h * tau).collect();
        let cx = dot(&prob.c, &x);
        let by = dot(&prob.b, &y);
        let hz = dot(&prob.h, &z);
        let rt = kappa + cx + by + hz;
        let gap = dot(&s, &z);
        let mu = (gap + tau * kappa) / (prob.degree as f64 + 1.0);
        let pcost = cx / tau;
        let dcost = -(by + hz) / tau;
        let pres = (norm(&ry) / tau / resy0).max(norm(&rz) / tau / resz0);
        let dres = norm(&rx) / tau / resx0;
        let ngap = gap / (tau * tau);
        let relgap = ngap.max((pcost - dcost).abs()) / pcost.abs().min(dcost.abs()).max(1.0);
        let slack = (dot(&rx, &x) - dot(&ry, &y) - dot(&rz, &z)).abs() / (tau * tau);
        last = Summary { pcost, dcost, gap: ngap, relgap, pres, dres };
        if settings.record_history {
            history.push(IterStats {
                iter: it,
                primal_objective: pcost,
                dual_objective: dcost,
                gap: ngap,
                primal_residual: pres,
                dual_residual: dres,
                duality_slack: slack,
                step: 0.0,
            });
        }

        if pres <= settings.feas_tol && dres <= settings.feas_tol && relgap <= settings.gap_tol {
            status = Status::Optimal;
            break;
        }
        if hz + by < 0.0 {
            let pinf = norm(&hrx) / resx0 / (-hz - by);
            if pinf <= settings.feas_tol {
                return Ok(finish(program, &prob, &kept, Status::Infeasible, &x, &y, &z, &s, -(hz + by), it, last, history));
            }
        }
        if cx < 0.0 {
            let dinf = (norm(&hry) / resy0).max(norm(&hrz) / resz0) / (-cx);
            if dinf <= settings.feas_tol {
                return Ok(finish(program, &prob, &kept, Status::Unbounded, &x, &y, &z, &s, -cx, it, last, history));
            }
        }
        if it == settings.max_iter {
            break;
        }

        let ghat = scaled_g(&prob, &sc);
        let kkt = Kkt::new(&prob, ghat);
        let hhat = winv_t_vec(&prob, &sc, &prob.h);
        // K̂ q = (c, -b, -ĥ), solved for q̃x = qx + x/τ instead: with
        // hτ = s + Gx - rz the right-hand side becomes (c, ry/τ, (r̂z - λ)/τ),
        // which avoids forming Ĝqx ≈ -ĥ from two large, nearly cancelling
        // terms once ĥ = W⁻ᵀh blows up near the boundary.
        let rzhat = winv_t_vec(&prob, &sc, &rz);
        let mut q3: Vec<f64> = rzhat.iter().map(|v| v / tau).collect();
        for (blk, s_) in prob.blocks.iter().zip(&sc) {
            for (i, &l) in s_.lambda.iter().enumerate() {
                q3[blk.offset + diag_index(i, blk.field)] -= l / tau;
            }
        }
        let q2: Vec<f64> = ry.iter().map(|v| v / tau).collect();
        let (qxs, qy, qz) = kkt.solve(&prob.c, &q2, &q3);
        let qx: Vec<f64> = qxs.iter().zip(&x).map(|(q, xi)| q - xi / tau).collect();
        // cᵀq_x + bᵀq_y + ĥᵀq_z reduces to ‖q_z‖² by the structure of K̂;
        // the reduced form cannot lose its sign to cancellation.
        let denom_base = dot(&qz, &qz);

        // Solve the linearized embedding for right-hand sides (dxr, dyr,
        // dzr, dtr) given in unscaled coordinates, the scaled
        // complementarity target `lds` = λ ⋄ d_s and the τκ target `dk`.
        let linear = |dxr: &[f64], dyr: &[f64], dzr: &[f64], dtr: f64, lds: &[f64], dk: f64| -> Option<Direction> {
            let wz = winv_t_vec(&prob, &sc, dzr);
            let dhat: Vec<f64> = wz.iter().zip(lds).map(|(a, b)| a - b).collect();
            let (px, py, pz) = kkt.solve(dxr, dyr, &dhat);
            let num = dot(&prob.c, &px) + dot(&prob.b, &py) + dot(&hhat, &pz) - dtr + dk / tau;
            let den = denom_base + kappa / tau;
            if !(den > 0.0) {
                return None;
            }
            let dtau = num / den;
            let dx: Vec<f64> = px.iter().zip(&qx).map(|(p, q)| p - dtau * q).collect();
            let dy: Vec<f64> = py.iter().zip(&qy).map(|(p, q)| p - dtau * q).collect();
            let dz: Vec<f64> = pz.iter().zip(&qz).map(|(p, q)| p - dtau * q).collect();
            let dkappa = (dk - kappa * dtau) / tau;
            let ds: Vec<f64> = lds.iter().zip(&dz).map(|(a, b)| a - b).collect();
            let ok = dx.iter().chain(&dz).chain(&ds).all(|v| v.is_finite()) && dtau.is_finite();
            ok.then(|| {
                let (ds_u, dz_u) = unscale_pair(&prob, &sc, &ds, &dz);
                Direction { dx, dy, dz, ds, ds_u, dz_u, dtau, dkappa }
            })
        };
        // Residual of the linear equations at `d`, in unscaled coordinates.
        let defect = |d: &Direction, dxr: &[f64], dyr: &[f64], dzr: &[f64], dtr: f64| {
            let aty = prob.at_mul(&d.dy);
            let gtz = prob.gt_mul(&d.dz_u);
            let e1: Vec<f64> = (0..n).map(|j| dxr[j] - aty[j] - gtz[j] - prob.c[j] * d.dtau).collect();
            let adx = prob.a_mul(&d.dx);
            let e2: Vec<f64> = (0..np).map(|i| dyr[i] - adx[i] + prob.b[i] * d.dtau).collect();
            let mut gdx = vec![0.0; m];
            prob.g_mul(&d.dx, &mut gdx);
            let e3: Vec<f64> = (0..m).map(|k| dzr[k] - gdx[k] - d.ds_u[k] + prob.h[k] * d.dtau).collect();
            let e4 = dtr - d.dkappa - dot(&prob.c, &d.dx) - dot(&prob.b, &d.dy) - dot(&prob.h, &d.dz_u);
            (e1, e2, e3, e4)
        };
        let size = |e: &(Vec<f64>, Vec<f64>, Vec<f64>, f64)| {
            (norm(&e.0) / resx0).max(norm(&e.1) / resy0).max(norm(&e.2) / resz0).max(e.3.abs())
        };
        let zero_m = vec![0.0; m];
        let newton = |eta: f64, lds: &[f64], dk: f64| -> Option<Direction> {
            let f = 1.0 - eta;
            let dxr: Vec<f64> = rx.iter().map(|v| -f * v).collect();
            let dyr: Vec<f64> = ry.iter().map(|v| -f * v).collect();
            let dzr: Vec<f64> = rz.iter().map(|v| -f * v).collect();
            let dtr = -f * rt;
            let mut d = linear(&dxr, &dyr, &dzr, dtr, lds, dk)?;
            // Iterative refinement against the unscaled equations: the
            // scaled system carries rounding of order eps·cond(W), which
            // otherwise feeds straight into the residuals near the boundary.
            let mut e = defect(&d, &dxr, &dyr, &dzr, dtr);
            for _ in 0..REFINE_PASSES {
                let before = size(&e);
                if before <= 1e-15 * tau {
                    break;
                }
                let Some(c) = linear(&e.0, &e.1, &e.2, e.3, &zero_m, 0.0) else { break };
                let mut t = d.clone();
                t.add(&c);
                let e_t = defect(&t, &dxr, &dyr, &dzr, dtr);
                if !(size(&e_t) < 0.5 * before) {
                    break;
                }
                d = t;
                e = e_t;
            }
            Some(d)
        };

        // Predictor: λ ⋄ (−λ∘λ) = −λ.
        let mut lds_aff = vec![0.0; m];
        for (blk, s_) in prob.blocks.iter().zip(&sc) {
            for (i, &l) in s_.lambda.iter().enumerate() {
                lds_aff[blk.offset + diag_index(i, blk.field)] = -l;
            }
        }
        let Some(aff) = newton(0.0, &lds_aff, -tau * kappa) else {
            status = Status::NumericalFailure;
            break;
        };
        let a_aff = max_step(&prob, &sc, &aff.ds, &aff.dz, tau, aff.dtau, kappa, aff.dkappa).min(1.0);
        let sigma = (1.0 - a_aff).max(0.0).powi(3);

        // Corrector with second-order term and centering.
        let mut lds = vec![0.0; m];
        for (blk, s_) in prob.blocks.iter().zip(&sc) {
            let dsa = block_mat(&aff.ds, blk);
            let dza = block_mat(&aff.dz, blk);
            let mut rhs = lambda_div(&s_.lambda, &jordan(dsa.as_mat(), dza.as_mat())).scale_real(-1.0);
            for (i, &l) in s_.lambda.iter().enumerate() {
                rhs[(i, i)] += C64::new(-l + sigma * mu / l, 0.0);
            }
            put_block(&rhs, blk, &mut lds);
        }
        let dk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let Some(dir) = newton(sigma, &lds, dk) else {
            status = Status::NumericalFailure;
            break;
        };
        let amax = max_step(&prob, &sc, &dir.ds, &dir.dz, tau, dir.dtau, kappa, dir.dkappa);
        let alpha = (settings.step_fraction * amax).min(1.0);
        if let Some(h) = history.last_mut() {
            h.step = alpha;
        }
        if !(alpha > MIN_STEP) {
            status = Status::NumericalFailure;
            break;
        }

        for (a, d) in x.iter_mut().zip(&dir.dx) {
            *a += alpha * d;
        }
        for (a, d) in y.iter_mut().zip(&dir.dy) {
            *a += alpha * d;
        }
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;

        // s and z are updated additively in unscaled coordinates and the
        // scaling is rebuilt from them. Composing scalings instead lets
        // rounding of order eps·cond(W)·‖z‖ leak into the residuals.
        let mut failed = false;
        for (bi, blk) in prob.blocks.iter().enumerate() {
            let s_new = Hermitian::symmetrize(&block_mat(&s, blk).into_mat() + &block_mat(&dir.ds_u, blk).into_mat().scale_real(alpha));
            let z_new = Hermitian::symmetrize(&block_mat(&z, blk).into_mat() + &block_mat(&dir.dz_u, blk).into_mat().scale_real(alpha));
            match nt_scaling(s_new.as_mat(), z_new.as_mat()) {
                Some(w) => {
                    put_block(s_new.as_mat(), blk, &mut s);
                    put_block(z_new.as_mat(), blk, &mut z);
                    sc[bi] = w;
                }
                None => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            status = Status::NumericalFailure;
            break;
        }
    }

    Ok(finish(program, &prob, &kept, status, &x, &y, &z, &s, tau, iters, last, history))
}

#[derive(Clone, Copy, Default)]
struct Summary {
    pcost: f64,
    dcost: f64,
    gap: f64,
    relgap: f64,
    pres: f64,
    dres: f64,
}

#[allow(clippy::too_many_arguments)]
fn finish(
    program: &ConicProgram,
    prob: &Problem,
    kept: &[usize],
    status: Status,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    s: &[f64],
    scale: f64,
    iters: usize,
    last: Summary,
    history: Vec<IterStats>,
) -> ConicSolution {
    // Normal exits divide by τ; certificates by the certificate's own
    // normalization so the returned ray has unit objective.
    let inv = 1.0 / scale;
    let xs: Vec<f64> = x.iter().map(|v| v * inv).collect();
    let mut yfull = vec![0.0; program.eq_rows.len()];
    for (&row, &v) in kept.iter().zip(y) {
        yfull[row] = v * inv;
    }
    let split = |v: &[f64]| -> Vec<Vec<f64>> {
        prob.blocks.iter().map(|b| v[b.offset..b.offset + b.len].iter().map(|t| t * inv).collect()).collect()
    };
    ConicSolution {
        status,
        x: xs,
        y: yfull,
        z: split(z),
        s: split(s),
        primal_objective: last.pcost,
        dual_objective: last.dcost,
        gap: last.gap,
        relative_gap: last.relgap,
        primal_residual: last.pres,
        dual_residual: last.dres,
        iterations: iters,
        history,
    }
}

fn trivial_solution(program: &ConicProgram, status: Status) -> ConicSolution {
    ConicSolution {
        status,
        x: vec![0.0; program.n_vars],
        y: vec![0.0; program.eq_rows.len()],
        z: program.blocks.iter().map(|b| vec![0.0; vec_len(b.dim, b.field)]).collect(),
        s: program.blocks.iter().map(|b| vec![0.0; vec_len(b.dim, b.field)]).collect(),
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        gap: f64::NAN,
        relative_gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations: 0,
        history: Vec::new(),
    }
}
