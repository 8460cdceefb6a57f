//! Dense complex linear algebra.

mod cmat;
mod eigh;
mod factor;
mod hermitian;

pub use cmat::{CMat, C64, I, ONE, ZERO};
pub use eigh::{eigh, Eigh};
pub use factor::{cholesky, complex_solve, jacobi_svd, lower_inverse, real_inverse, real_solve, Svd};
pub use hermitian::{
    basis_coordinates, embed_at, from_coordinates, hermitian_basis, kron, kron_h, nuclear_norm, pauli,
    pos_neg_split, sandwich_trabs, sqrt_psd, tensor_power, trabs, Hermitian, RANK_TOL, SIZE_CAP,
};
pub(crate) use hermitian::checked_pow;

use alloc::vec::Vec;

use crate::error::Result;

/// Eigen-decomposition of a real symmetric row-major matrix; eigenvectors
/// are returned as columns of a row-major real matrix.
pub fn sym_eigh(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = Hermitian::from_real(n, a);
    let e = eigh(&h)?;
    // Real symmetric input: eigenvectors can be rotated to be real.
    let mut vecs = alloc::vec![0.0; n * n];
    for j in 0..n {
        // Remove the global phase of each column using its largest entry.
        let mut best = ZERO;
        for i in 0..n {
            if e.vectors[(i, j)].norm() > best.norm() {
                best = e.vectors[(i, j)];
            }
        }
        let ph = if best.norm() > 0.0 { best.conj() / best.norm() } else { ONE };
        for i in 0..n {
            vecs[i * n + j] = (e.vectors[(i, j)] * ph).re;
        }
    }
    Ok((e.values, vecs))
}

/// Real symmetric matrix function V f(Λ) V^T.
pub fn sym_fn(a: &[f64], n: usize, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let h = Hermitian::from_real(n, a);
    let e = eigh(&h)?;
    let m = e.reconstruct_with(f);
    Ok((0..n * n).map(|k| m[(k / n, k % n)].re).collect())
}
