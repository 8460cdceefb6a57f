use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, Zero};

use super::cmat::{CMat, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Lower-triangular L with A = L L^H. Fails if a pivot is not positive.
pub fn cholesky(a: &CMat) -> Result<CMat> {
    let n = a.rows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &CMat) -> CMat {
    let n = l.rows();
    let mut inv = CMat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = ONE / l[(j, j)];
        for i in j + 1..n {
            let mut s = ZERO;
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// One-sided Jacobi SVD of a square matrix: A = U diag(sigma) V^H.
/// Singular values are returned in the order the sweeps leave them.
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn jacobi_svd(a: &CMat) -> Result<Svd> {
    let n = a.cols();
    let m = a.rows();
    // Work column-wise: cols[j] is column j of A V.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m as f64).max(1.0);
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                for k in 0..m {
                    let up = cols[p][k];
                    let uq = cols[q][k] * pc;
                    cols[p][k] = up * c - uq * s;
                    cols[q][k] = up * s + uq * c;
                }
                for k in 0..n {
                    let vp = vcols[p][k];
                    let vq = vcols[q][k] * pc;
                    vcols[p][k] = vp * c - vq * s;
                    vcols[q][k] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: 80, dim: n, norm: a.max_abs() });
    }
    let mut u = CMat::zeros(m, n);
    let mut v = CMat::zeros(n, n);
    let mut sigma = vec![0.0; n];
    for j in 0..n {
        let s: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        sigma[j] = s;
        for k in 0..m {
            u[(k, j)] = if s > 0.0 { cols[j][k] / s } else { ZERO };
        }
        for k in 0..n {
            v[(k, j)] = vcols[j][k];
        }
    }
    Ok(Svd { u, sigma, v })
}

/// Dense real LU solve with partial pivoting; `a` is row-major n x n.
/// Returns None when a pivot vanishes.
pub fn real_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let nrhs = b.len() / n;
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (piv, pval) = (k..n).map(|i| (i, m[i * n + k].abs())).fold((k, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if pval <= 1e-14 * scale {
            return None;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            for j in 0..nrhs {
                x.swap(k * nrhs + j, piv * nrhs + j);
            }
        }
        let d = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / d;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            for j in 0..nrhs {
                x[i * nrhs + j] -= f * x[k * nrhs + j];
            }
        }
    }
    for k in (0..n).rev() {
        let d = m[k * n + k];
        for j in 0..nrhs {
            let mut s = x[k * nrhs + j];
            for i in k + 1..n {
                s -= m[k * n + i] * x[i * nrhs + j];
            }
            x[k * nrhs + j] = s / d;
        }
    }
    Some(x)
}

/// Inverse of a real n x n matrix (row-major), None if singular.
pub fn real_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut id = vec![0.0; n * n];
    for i in 0..n {
        id[i * n + i] = 1.0;
    }
    real_solve(a, &id, n)
}

/// Complex linear solve A X = B by partial-pivot LU.
pub fn complex_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.rows();
    let nrhs = b.cols();
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut piv = k;
        let mut pval = -1.0;
        for i in k..n {
            let v = m[(i, k)].norm();
            if v > pval {
                piv = i;
                pval = v;
            }
        }
        if pval <= 1e-14 * scale {
            return Err(Error::NotPositiveDefinite);
        }
        if piv != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            for j in 0..nrhs {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        let d = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
            for j in 0..nrhs {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let d = m[(k, k)];
        for j in 0..nrhs {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= m[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / d;
        }
    }
    Ok(x)
}
