use alloc::vec::Vec;
use core::ops::Deref;

use num_traits::Float;

use super::cmat::{CMat, C64, I, ONE, ZERO};
use super::eigh::{eigh, Eigh};
use crate::error::{Error, Result};

/// Relative eigenvalue threshold below which a direction counts as kernel.
pub const RANK_TOL: f64 = 1e-10;

/// Default cap on tensor-power dimensions.
pub const SIZE_CAP: usize = 4096;

/// Complex matrix known to be Hermitian. Construction always symmetrizes,
/// so the stored matrix is Hermitian to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMat);

impl Deref for Hermitian {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl Hermitian {
    /// (A + A^H)/2, for matrices that are Hermitian up to rounding.
    pub fn symmetrize(a: CMat) -> Self {
        assert!(a.is_square(), "Hermitian matrices are square");
        let n = a.rows();
        let mut h = a;
        for i in 0..n {
            h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        Hermitian(h)
    }

    /// Checked construction: rejects matrices whose anti-Hermitian part
    /// exceeds `1e-9 * max(1, max|A_ij|)`.
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(alloc::format!("{}x{} is not square", a.rows(), a.cols())));
        }
        let defect = a.hermitian_defect();
        if !(defect <= 1e-9 * a.max_abs().max(1.0)) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrize(a))
    }

    pub fn zeros(d: usize) -> Self {
        Hermitian(CMat::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(CMat::identity(d))
    }

    pub fn diag(d: &[f64]) -> Self {
        Hermitian(CMat::diag_real(d))
    }

    pub fn from_real(d: usize, data: &[f64]) -> Self {
        Self::symmetrize(CMat::from_real(d, d, data))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    /// Real trace.
    pub fn tr(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale_real(s))
    }

    pub fn add(&self, o: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &o.0)
    }

    /// tr(A B), real for Hermitian A, B.
    pub fn dot(&self, o: &Hermitian) -> f64 {
        self.0.trace_mul(&o.0).re
    }

    /// B A B^H for any square B.
    pub fn congruence(&self, b: &CMat) -> Hermitian {
        Hermitian::symmetrize(b.matmul(&self.0).matmul(&b.adjoint()))
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh(self)
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

pub fn kron_h(a: &Hermitian, b: &Hermitian) -> Hermitian {
    Hermitian::symmetrize(a.kron(b))
}

/// A^{⊗M}, guarded by `cap` on the resulting dimension.
pub fn tensor_power(a: &CMat, m: usize, cap: usize) -> Result<CMat> {
    if m == 0 {
        return Err(Error::IndexOutOfRange { index: 0, len: usize::MAX });
    }
    checked_pow(a.rows().max(a.cols()), m, cap)?;
    let mut out = a.clone();
    for _ in 1..m {
        out = out.kron(a);
    }
    Ok(out)
}

pub(crate) fn checked_pow(d: usize, m: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..m {
        dim = dim.checked_mul(d).ok_or(Error::SizeLimit { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::SizeLimit { dim, cap });
        }
    }
    Ok(dim)
}

/// I ⊗ … ⊗ A ⊗ … ⊗ I with `a` in slot `k` (1-based) of `m` factors.
pub fn embed_at(a: &Hermitian, k: usize, m: usize, cap: usize) -> Result<Hermitian> {
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange { index: k, len: m });
    }
    let d = a.dim();
    checked_pow(d, m, cap)?;
    let left = CMat::identity(d.pow((k - 1) as u32));
    let right = CMat::identity(d.pow((m - k) as u32));
    Ok(Hermitian::symmetrize(left.kron(a.as_mat()).kron(&right)))
}

/// Sum of absolute eigenvalues.
pub fn trabs(a: &Hermitian) -> Result<f64> {
    Ok(eigh(a)?.values.iter().map(|v| v.abs()).sum())
}

/// Nuclear norm of a general square matrix: tr sqrt(A^H A).
pub fn nuclear_norm(a: &CMat) -> Result<f64> {
    let g = Hermitian::symmetrize(a.adjoint_mul(a));
    Ok(eigh(&g)?.values.iter().map(|v| v.max(0.0).sqrt()).sum())
}

/// PSD square root. Eigenvalues below `rank_tol * λ_max` are clamped to
/// zero; anything below `-rank_tol * ‖A‖` is an error.
pub fn sqrt_psd(a: &Hermitian, rank_tol: f64) -> Result<Hermitian> {
    let e = eigh(a)?;
    sqrt_from_eigh(&e, rank_tol)
}

pub(crate) fn sqrt_from_eigh(e: &Eigh, rank_tol: f64) -> Result<Hermitian> {
    let norm = e.max_abs_value();
    let lmax = e.values.last().copied().unwrap_or(0.0);
    if let Some(&lmin) = e.values.first() {
        if lmin < -rank_tol * norm {
            return Err(Error::NotPsd { eig: lmin, tol: rank_tol * norm });
        }
    }
    let cut = rank_tol * lmax;
    Ok(e.reconstruct_with(|x| if x > cut { x.sqrt() } else { 0.0 }))
}

/// tr|√S A √S|.
pub fn sandwich_trabs(s: &Hermitian, a: &Hermitian) -> Result<f64> {
    let r = sqrt_psd(s, RANK_TOL)?;
    trabs(&a.congruence(&r))
}

/// A = A₊ − A₋ with A₊, A₋ ⪰ 0 on orthogonal eigenspaces.
pub fn pos_neg_split(a: &Hermitian) -> Result<(Hermitian, Hermitian)> {
    let e = eigh(a)?;
    let p = e.reconstruct_with(|x| if x > 0.0 { x } else { 0.0 });
    let m = e.reconstruct_with(|x| if x < 0.0 { -x } else { 0.0 });
    Ok((p, m))
}

/// Orthonormal Hermitian basis of size d²: I/√d first, then for each pair
/// j<k the symmetric and antisymmetric off-diagonal generators, then the
/// traceless diagonal generators.
pub fn hermitian_basis(d: usize) -> Vec<Hermitian> {
    let mut out = Vec::with_capacity(d * d);
    let s2 = core::f64::consts::FRAC_1_SQRT_2;
    out.push(Hermitian::identity(d).scale(1.0 / (d as f64).sqrt()));
    for j in 0..d {
        for k in j + 1..d {
            let mut a = CMat::zeros(d, d);
            a[(j, k)] = C64::new(s2, 0.0);
            a[(k, j)] = C64::new(s2, 0.0);
            out.push(Hermitian(a));
            let mut b = CMat::zeros(d, d);
            b[(j, k)] = -I * s2;
            b[(k, j)] = I * s2;
            out.push(Hermitian(b));
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = alloc::vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push(Hermitian::diag(&diag));
    }
    out
}

/// Real coordinates of `a` in an orthonormal Hermitian basis.
pub fn basis_coordinates(a: &Hermitian, basis: &[Hermitian]) -> Vec<f64> {
    basis.iter().map(|b| b.dot(a)).collect()
}

pub fn from_coordinates(coords: &[f64], basis: &[Hermitian]) -> Hermitian {
    let d = basis.first().map(|b| b.dim()).unwrap_or(0);
    let mut acc = CMat::zeros(d, d);
    for (c, b) in coords.iter().zip(basis) {
        if *c != 0.0 {
            acc += &b.scale_real(*c);
        }
    }
    Hermitian::symmetrize(acc)
}

/// Pauli matrices.
pub fn pauli() -> [Hermitian; 3] {
    let x = CMat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO });
    let y = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    });
    let z = CMat::diag_real(&[1.0, -1.0]);
    [Hermitian(x), Hermitian(y), Hermitian(z)]
}
