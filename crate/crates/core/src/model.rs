//! Quantum statistical models: a density matrix together with its partial
//! derivatives, plus the support geometry and SLD machinery built on them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, kron, real_inverse, sandwich_trabs, sym_eigh, CMat, Hermitian, C64, I, RANK_TOL, SIZE_CAP,
};

const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const DERIV_TRACE_TOL: f64 = 1e-9;
const INDEPENDENCE_TOL: f64 = 1e-10;
const LEAK_TOL: f64 = 1e-8;
const FISHER_TOL: f64 = 1e-12;
/// Commutator sandwich norms at or below this count as zero.
pub const QUASICLASSICAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct StatisticalModel {
    state: Hermitian,
    derivs: Vec<Hermitian>,
    label: String,
    copies: usize,
}

impl StatisticalModel {
    /// Build and validate a model.
    pub fn new(state: Hermitian, derivs: Vec<Hermitian>, label: impl Into<String>) -> Result<Self> {
        let m = StatisticalModel { state, derivs, label: label.into(), copies: 1 };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
    pub fn n_params(&self) -> usize {
        self.derivs.len()
    }
    pub fn state(&self) -> &Hermitian {
        &self.state
    }
    pub fn derivs(&self) -> &[Hermitian] {
        &self.derivs
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// Number of copies this model represents (1 unless built by
    /// [`tensor_power_model`]).
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidModel("zero-dimensional state".into()));
        }
        if self.derivs.is_empty() {
            return Err(Error::InvalidModel("model has no parameters".into()));
        }
        for (i, s) in self.derivs.iter().enumerate() {
            if s.dim() != d {
                return Err(Error::Shape(format!("derivative {i} is {}x{}, state is {d}x{d}", s.dim(), s.dim())));
            }
        }
        let tr = self.state.tr();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidModel(format!("trace of the state is {tr}")));
        }
        let sd = support_decomposition(&self.state, RANK_TOL)?;
        let lmin = sd.values.last().copied().unwrap_or(0.0);
        if lmin < -PSD_TOL {
            return Err(Error::NotPsd { eig: lmin, tol: PSD_TOL });
        }
        for (i, s) in self.derivs.iter().enumerate() {
            let t = s.tr();
            if t.abs() > DERIV_TRACE_TOL {
                return Err(Error::InvalidModel(format!("derivative {i} has trace {t:e}")));
            }
            let leak = sd.kernel_block_norm(s);
            if leak > LEAK_TOL * s.max_abs().max(1.0) {
                return Err(Error::ModelInconsistent { index: i, leak });
            }
        }
        let n = self.n_params();
        let gram: Vec<f64> = (0..n * n).map(|k| self.derivs[k / n].dot(&self.derivs[k % n])).collect();
        let (ev, _) = sym_eigh(&gram, n)?;
        let max = ev.last().copied().unwrap_or(0.0);
        if !(ev[0] > INDEPENDENCE_TOL * max) {
            return Err(Error::InvalidModel(format!(
                "derivatives are linearly dependent (Gram eigenvalues {:e} .. {:e})",
                ev[0], max
            )));
        }
        Ok(())
    }
}

/// Eigen-decomposition of a state sorted support first (descending
/// eigenvalues), with the rank split.
#[derive(Clone, Debug)]
pub struct SupportDecomposition {
    pub rank: usize,
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub basis: CMat,
    pub support_projector: Hermitian,
    pub kernel_projector: Hermitian,
}

impl SupportDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// U^H A U.
    pub fn to_eigenbasis(&self, a: &Hermitian) -> Hermitian {
        Hermitian::symmetrize(self.basis.adjoint().matmul(a.as_mat()).matmul(&self.basis))
    }

    /// U B U^H.
    pub fn from_eigenbasis(&self, b: &CMat) -> Hermitian {
        Hermitian::symmetrize(self.basis.matmul(b).matmul(&self.basis.adjoint()))
    }

    /// Frobenius norm of the kernel-kernel block of `a`.
    pub fn kernel_block_norm(&self, a: &Hermitian) -> f64 {
        let r = self.rank;
        let d = self.dim();
        if r == d {
            return 0.0;
        }
        let e = self.to_eigenbasis(a);
        let mut acc = 0.0;
        for i in r..d {
            for j in r..d {
                acc += e[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Whether eigenbasis entry (a, b) lies outside the kernel-kernel block.
    #[inline]
    pub fn in_quotient(&self, a: usize, b: usize) -> bool {
        a < self.rank || b < self.rank
    }
}

/// Rank is the number of eigenvalues above `rank_tol` times the largest.
pub fn support_decomposition(s: &Hermitian, rank_tol: f64) -> Result<SupportDecomposition> {
    let e = eigh(s)?;
    let d = s.dim();
    let order: Vec<usize> = (0..d).rev().collect();
    let values: Vec<f64> = order.iter().map(|&k| e.values[k]).collect();
    let basis = e.vectors.select(&(0..d).collect::<Vec<_>>(), &order);
    let max = values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = values.iter().filter(|&&v| v > rank_tol * max).count();
    let proj = |range: core::ops::Range<usize>| {
        let mut p = CMat::zeros(d, d);
        for k in range {
            for i in 0..d {
                for j in 0..d {
                    p[(i, j)] += basis[(i, k)] * basis[(j, k)].conj();
                }
            }
        }
        Hermitian::symmetrize(p)
    };
    Ok(SupportDecomposition {
        rank,
        values,
        support_projector: proj(0..rank),
        kernel_projector: proj(rank..d),
        basis,
    })
}

/// Which Hermitian generator a quotient element is, in the eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientKind {
    /// E_aa.
    Diagonal,
    /// (E_ab + E_ba)/√2.
    Symmetric,
    /// i(E_ab − E_ba)/√2.
    Antisymmetric,
}

#[derive(Clone, Copy, Debug)]
pub struct QuotientElement {
    pub a: usize,
    pub b: usize,
    pub kind: QuotientKind,
}

impl QuotientElement {
    /// The element as a matrix in the eigenbasis.
    pub fn eigen_matrix(&self, d: usize) -> CMat {
        let s2 = core::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMat::zeros(d, d);
        match self.kind {
            QuotientKind::Diagonal => m[(self.a, self.a)] = C64::new(1.0, 0.0),
            QuotientKind::Symmetric => {
                m[(self.a, self.b)] = C64::new(s2, 0.0);
                m[(self.b, self.a)] = C64::new(s2, 0.0);
            }
            QuotientKind::Antisymmetric => {
                m[(self.a, self.b)] = I * s2;
                m[(self.b, self.a)] = -I * s2;
            }
        }
        m
    }

    /// The entries (row, col, value) of the eigenbasis matrix.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let s2 = core::f64::consts::FRAC_1_SQRT_2;
        match self.kind {
            QuotientKind::Diagonal => vec![(self.a, self.a, C64::new(1.0, 0.0))],
            QuotientKind::Symmetric => vec![(self.a, self.b, C64::new(s2, 0.0)), (self.b, self.a, C64::new(s2, 0.0))],
            QuotientKind::Antisymmetric => vec![(self.a, self.b, I * s2), (self.b, self.a, -I * s2)],
        }
    }
}

/// Orthonormal Hermitian basis of operators modulo the kernel-kernel
/// block of the state.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    pub support: SupportDecomposition,
    pub elements: Vec<QuotientElement>,
}

impl QuotientBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element k in the original basis.
    pub fn element(&self, k: usize) -> Hermitian {
        self.support.from_eigenbasis(&self.elements[k].eigen_matrix(self.support.dim()))
    }

    pub fn elements_original(&self) -> Vec<Hermitian> {
        (0..self.len()).map(|k| self.element(k)).collect()
    }

    /// Operator Σ_k c_k E_k in the original basis.
    pub fn combine(&self, coords: &[f64]) -> Hermitian {
        let d = self.support.dim();
        let mut m = CMat::zeros(d, d);
        for (el, &c) in self.elements.iter().zip(coords) {
            if c != 0.0 {
                for (i, j, v) in el.entries() {
                    m[(i, j)] += v * c;
                }
            }
        }
        self.support.from_eigenbasis(&m)
    }

    /// Coordinates of `a` (its kernel-kernel block is discarded).
    pub fn coordinates(&self, a: &Hermitian) -> Vec<f64> {
        let e = self.support.to_eigenbasis(a);
        let s2 = core::f64::consts::SQRT_2;
        self.elements
            .iter()
            .map(|el| match el.kind {
                QuotientKind::Diagonal => e[(el.a, el.a)].re,
                QuotientKind::Symmetric => s2 * e[(el.a, el.b)].re,
                QuotientKind::Antisymmetric => s2 * e[(el.a, el.b)].im,
            })
            .collect()
    }
}

pub fn quotient_basis_of(support: SupportDecomposition) -> QuotientBasis {
    let d = support.dim();
    let r = support.rank;
    let mut elements = Vec::with_capacity(r * r + 2 * r * (d - r));
    for a in 0..r {
        elements.push(QuotientElement { a, b: a, kind: QuotientKind::Diagonal });
    }
    for a in 0..r {
        for b in a + 1..d {
            elements.push(QuotientElement { a, b, kind: QuotientKind::Symmetric });
            elements.push(QuotientElement { a, b, kind: QuotientKind::Antisymmetric });
        }
    }
    QuotientBasis { support, elements }
}

pub fn quotient_basis(m: &StatisticalModel) -> Result<QuotientBasis> {
    Ok(quotient_basis_of(support_decomposition(m.state(), RANK_TOL)?))
}

/// Symmetric logarithmic derivatives and the SLD Fisher matrix.
#[derive(Clone, Debug)]
pub struct SldSet {
    pub slds: Vec<Hermitian>,
    /// Row-major n×n.
    pub fisher: Vec<f64>,
}

impl SldSet {
    pub fn n(&self) -> usize {
        self.slds.len()
    }

    pub fn fisher_inverse(&self) -> Result<Vec<f64>> {
        let n = self.n();
        real_inverse(&self.fisher, n).ok_or(Error::SingularFisher(0.0))
    }
}

pub fn sld_operators(m: &StatisticalModel) -> Result<SldSet> {
    let sd = support_decomposition(m.state(), RANK_TOL)?;
    sld_operators_with(m, &sd)
}

pub(crate) fn sld_operators_with(m: &StatisticalModel, sd: &SupportDecomposition) -> Result<SldSet> {
    let d = m.dim();
    let lam = &sd.values;
    let mut slds = Vec::with_capacity(m.n_params());
    let mut eig_slds = Vec::with_capacity(m.n_params());
    for s in m.derivs() {
        let e = sd.to_eigenbasis(s);
        let l = CMat::from_fn(d, d, |a, b| {
            if sd.in_quotient(a, b) {
                e[(a, b)] * (2.0 / (lam[a] + lam[b]))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        slds.push(sd.from_eigenbasis(&l));
        eig_slds.push(l);
    }
    let n = m.n_params();
    let mut fisher = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            // Re tr(S L_i L_j) with S diagonal in the eigenbasis.
            let mut acc = 0.0;
            for a in 0..sd.rank {
                for b in 0..d {
                    acc += lam[a] * (eig_slds[i][(a, b)] * eig_slds[j][(b, a)]).re;
                }
            }
            fisher[i * n + j] = acc;
            fisher[j * n + i] = acc;
        }
    }
    let (ev, _) = sym_eigh(&fisher, n)?;
    if !(ev[0] >= FISHER_TOL) {
        return Err(Error::SingularFisher(ev[0]));
    }
    Ok(SldSet { slds, fisher })
}

/// Real symmetric positive definite weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        WeightMatrix { n, data }
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = d[i];
        }
        Self::new(n, data)
    }

    /// Row-major data; must be symmetric to 1e-12 relative and positive
    /// definite.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n || n == 0 {
            return Err(Error::Shape(format!("weight matrix needs {} entries, got {}", n * n, data.len())));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::Domain("weight matrix is not symmetric".into()));
                }
            }
        }
        let (ev, _) = sym_eigh(&data, n)?;
        if !(ev[0] > 0.0) {
            return Err(Error::Domain(format!("weight matrix is not positive definite (eigenvalue {:e})", ev[0])));
        }
        Ok(WeightMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        *self == WeightMatrix::identity(self.n)
    }

    pub fn sqrt(&self) -> Result<Vec<f64>> {
        crate::linalg::sym_fn(&self.data, self.n, |x| x.max(0.0).sqrt())
    }

    pub fn inv_sqrt(&self) -> Result<Vec<f64>> {
        crate::linalg::sym_fn(&self.data, self.n, |x| 1.0 / x.sqrt())
    }

    pub(crate) fn check_arity(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::WrongArity { expected: n, found: self.n });
        }
        Ok(())
    }
}

/// tr(W J⁻¹).
pub fn sldcrb(m: &StatisticalModel, w: &WeightMatrix) -> Result<f64> {
    w.check_arity(m.n_params())?;
    let set = sld_operators(m)?;
    let inv = set.fisher_inverse()?;
    Ok(w.data().iter().zip(&inv).map(|(a, b)| a * b).sum())
}

/// The SLD-bound optimizer X_i = Σ_j (J⁻¹)_{ji} L_j.
pub fn sld_optimizer(set: &SldSet) -> Result<Vec<Hermitian>> {
    let n = set.n();
    let inv = set.fisher_inverse()?;
    let d = set.slds[0].dim();
    Ok((0..n)
        .map(|i| {
            let mut acc = CMat::zeros(d, d);
            for j in 0..n {
                acc += &set.slds[j].scale_real(inv[j * n + i]);
            }
            Hermitian::symmetrize(acc)
        })
        .collect())
}

/// The M-copy model S^{⊗M} with product-rule derivatives.
pub fn tensor_power_model(m: &StatisticalModel, copies: usize) -> Result<StatisticalModel> {
    if copies == 0 {
        return Err(Error::Domain("copy number must be at least 1".into()));
    }
    if copies == 1 {
        return Ok(m.clone());
    }
    let d = m.dim();
    let total = crate::linalg::checked_pow(d, copies, SIZE_CAP)?;
    let s = m.state().as_mat();
    // Running pair (S^{⊗k}, ∂S^{⊗k}) built one factor at a time.
    let mut power = s.clone();
    let mut derivs: Vec<CMat> = m.derivs().iter().map(|x| x.as_mat().clone()).collect();
    for _ in 1..copies {
        for (dv, si) in derivs.iter_mut().zip(m.derivs()) {
            *dv = &kron(dv, s) + &kron(&power, si.as_mat());
        }
        power = kron(&power, s);
    }
    debug_assert_eq!(power.rows(), total);
    Ok(StatisticalModel {
        state: Hermitian::symmetrize(power),
        derivs: derivs.into_iter().map(Hermitian::symmetrize).collect(),
        label: format!("{}^{}", m.label, copies),
        copies: m.copies * copies,
    })
}

/// Model whose identity-weight bounds equal the W-weighted bounds of `m`:
/// S'_i = Σ_j (W^{-1/2})_{ji} S_j.
pub fn reparameterize(m: &StatisticalModel, w: &WeightMatrix) -> Result<StatisticalModel> {
    let n = m.n_params();
    w.check_arity(n)?;
    if w.is_identity() {
        return Ok(m.clone());
    }
    let t = w.inv_sqrt()?;
    let d = m.dim();
    let derivs = (0..n)
        .map(|i| {
            let mut acc = CMat::zeros(d, d);
            for j in 0..n {
                acc += &m.derivs[j].scale_real(t[j * n + i]);
            }
            Hermitian::symmetrize(acc)
        })
        .collect();
    Ok(StatisticalModel { state: m.state.clone(), derivs, label: format!("{} (reweighted)", m.label), copies: m.copies })
}

/// Largest sandwich_trabs(S, i[L_i, L_j]) over parameter pairs, and whether
/// it vanishes.
pub fn quasiclassicality_test(m: &StatisticalModel) -> Result<(bool, f64)> {
    let set = sld_operators(m)?;
    let mut worst = 0.0f64;
    for i in 0..set.n() {
        for j in i + 1..set.n() {
            let c = CMat::commutator(set.slds[i].as_mat(), set.slds[j].as_mat()).scale(I);
            worst = worst.max(sandwich_trabs(m.state(), &Hermitian::symmetrize(c))?);
        }
    }
    Ok((worst <= QUASICLASSICAL_TOL, worst))
}

/// Central-difference derivatives of a state family.
#[derive(Clone, Debug)]
pub struct FiniteDifference {
    pub derivs: Vec<Hermitian>,
    /// Largest Frobenius difference between the estimates at `step` and
    /// `step / 2`.
    pub discrepancy: f64,
}

/// Discrepancies above this between the step and half-step estimates are
/// logged as a warning.
pub const FD_WARN: f64 = 1e-5;

pub fn finite_difference_derivs<F>(state: F, theta: &[f64], step: f64) -> Result<FiniteDifference>
where
    F: Fn(&[f64]) -> Result<Hermitian>,
{
    if !(step > 0.0) {
        return Err(Error::Domain("finite-difference step must be positive".into()));
    }
    let probe = |t: &[f64]| -> Result<Hermitian> {
        let s = state(t)?;
        let tr = s.tr();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidModel(format!("state function returned trace {tr} at a probe point")));
        }
        let lmin = eigh(&s)?.values[0];
        if lmin < -1e-8 {
            return Err(Error::InvalidModel(format!("state function returned eigenvalue {lmin:e} at a probe point")));
        }
        Ok(s)
    };
    let central = |i: usize, h: f64| -> Result<Hermitian> {
        let mut tp = theta.to_vec();
        let mut tm = theta.to_vec();
        tp[i] += h;
        tm[i] -= h;
        let diff = probe(&tp)?.sub(&probe(&tm)?);
        Ok(diff.scale(1.0 / (2.0 * h)))
    };
    let mut derivs = Vec::with_capacity(theta.len());
    let mut discrepancy = 0.0f64;
    for i in 0..theta.len() {
        let full = central(i, step)?;
        let half = central(i, step / 2.0)?;
        discrepancy = discrepancy.max(full.sub(&half).frobenius());
        derivs.push(full);
    }
    if discrepancy > FD_WARN {
        log::warn!("finite-difference derivatives disagree between step and half step by {discrepancy:e}");
    }
    Ok(FiniteDifference { derivs, discrepancy })
}
