//! Orthonormal vectorization of symmetric/Hermitian blocks.
//!
//! Column-major over the upper triangle: for column j, the strict upper
//! entries i < j come first (one coordinate each for real blocks, two for
//! complex), then the diagonal entry.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::Field;
use crate::linalg::{CMat, Hermitian, C64};

const SQRT2: f64 = core::f64::consts::SQRT_2;

#[inline]
fn per_off(field: Field) -> usize {
    match field {
        Field::Real => 1,
        Field::Complex => 2,
    }
}

pub fn vec_len(dim: usize, field: Field) -> usize {
    match field {
        Field::Real => dim * (dim + 1) / 2,
        Field::Complex => dim * dim,
    }
}

#[inline]
fn col_start(j: usize, f: usize) -> usize {
    j + f * j * j.saturating_sub(1) / 2
}

#[inline]
pub(crate) fn diag_index(j: usize, field: Field) -> usize {
    let f = per_off(field);
    col_start(j, f) + f * j
}

#[inline]
pub(crate) fn off_index(i: usize, j: usize, field: Field) -> usize {
    debug_assert!(i < j);
    col_start(j, per_off(field)) + per_off(field) * i
}

/// Coordinates touched by setting entry (i, j) to `value` (with the
/// Hermitian mirror implied).
pub(crate) fn entry_coords(dim: usize, field: Field, i: usize, j: usize, value: C64) -> Vec<(usize, f64)> {
    assert!(i < dim && j < dim, "entry ({i},{j}) outside a {dim}x{dim} block");
    if i == j {
        debug_assert!(value.im == 0.0, "diagonal entries of a Hermitian block are real");
        return vec![(diag_index(i, field), value.re)];
    }
    let (i, j, v) = if i < j { (i, j, value) } else { (j, i, value.conj()) };
    let k = off_index(i, j, field);
    match field {
        Field::Real => {
            debug_assert!(v.im == 0.0, "real block given a complex entry");
            vec![(k, SQRT2 * v.re)]
        }
        Field::Complex => vec![(k, SQRT2 * v.re), (k + 1, SQRT2 * v.im)],
    }
}

pub fn mat_of(v: &[f64], dim: usize, field: Field) -> Hermitian {
    let mut m = CMat::zeros(dim, dim);
    let f = per_off(field);
    for j in 0..dim {
        let s = col_start(j, f);
        for i in 0..j {
            let k = s + f * i;
            let z = match field {
                Field::Real => C64::new(v[k] / SQRT2, 0.0),
                Field::Complex => C64::new(v[k] / SQRT2, v[k + 1] / SQRT2),
            };
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m[(j, j)] = C64::new(v[s + f * j], 0.0);
    }
    Hermitian::symmetrize(m)
}

/// Vectorize the upper triangle of a (Hermitian) matrix.
pub fn vec_of(m: &CMat, field: Field) -> Vec<f64> {
    let dim = m.rows();
    let mut out = vec![0.0; vec_len(dim, field)];
    write_vec(m, field, &mut out);
    out
}

pub(crate) fn write_vec(m: &CMat, field: Field, out: &mut [f64]) {
    let dim = m.rows();
    let f = per_off(field);
    for j in 0..dim {
        let s = col_start(j, f);
        for i in 0..j {
            let k = s + f * i;
            let z = m[(i, j)];
            out[k] = SQRT2 * z.re;
            if f == 2 {
                out[k + 1] = SQRT2 * z.im;
            }
        }
        out[s + f * j] = m[(j, j)].re;
    }
}

/// Real-symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian
/// matrix. Its spectrum is that of A with every multiplicity doubled.
pub fn embed_matrix(a: &CMat) -> CMat {
    let d = a.rows();
    let mut e = CMat::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = a[(i, j)];
            e[(i, j)] = C64::new(z.re, 0.0);
            e[(i + d, j + d)] = C64::new(z.re, 0.0);
            e[(i, j + d)] = C64::new(-z.im, 0.0);
            e[(i + d, j)] = C64::new(z.im, 0.0);
        }
    }
    e
}

/// Identity element of the cone in vectorized form.
pub(crate) fn identity_vec(dim: usize, field: Field) -> Vec<f64> {
    let mut v = vec![0.0; vec_len(dim, field)];
    for j in 0..dim {
        v[diag_index(j, field)] = 1.0;
    }
    v
}

#[allow(dead_code)]
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
