//! Hermitian eigensolver: complex Householder reduction to a real symmetric
//! tridiagonal matrix, then implicit QL iterations with Wilkinson-type shifts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, Zero};

use super::cmat::{CMat, C64, ONE, ZERO};
use super::hermitian::Hermitian;
use crate::error::{Error, Result};

/// Eigen-decomposition A = U diag(values) U^H, values ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are eigenvectors.
    pub vectors: CMat,
}

impl Eigh {
    /// Rebuild U f(Λ) U^H for a spectral function f.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * fv[k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        Hermitian::symmetrize(out)
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.reconstruct_with(|x| x)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

const MAX_QL_ITER: usize = 60;

pub fn eigh(a: &Hermitian) -> Result<Eigh> {
    let n = a.dim();
    if n == 0 {
        return Ok(Eigh { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    let mut m = a.as_mat().clone();
    let mut q = CMat::identity(n);
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    let mut qv = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let tail: f64 = (k + 2..n).map(|i| m[(i, k)].norm_sqr()).sum();
        let head = m[(k + 1, k)];
        let xnorm2 = tail + head.norm_sqr();
        if tail == 0.0 || tail <= f64::EPSILON * f64::EPSILON * xnorm2 {
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let phase = if head.norm() > 0.0 { head / head.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for x in v.iter_mut() {
            *x = ZERO;
        }
        v[k + 1] = head - alpha;
        for i in k + 2..n {
            v[i] = m[(i, k)];
        }
        let vnorm2: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // p = tau * M v
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += m[(i, j)] * v[j];
            }
            p[i] = s * tau;
        }
        let vp: C64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = 0.5 * tau * vp.re;
        // w = p - K v ; M <- M - v w^H - w v^H
        for i in 0..n {
            p[i] -= v[i] * kk;
        }
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                if !upd.is_zero() {
                    m[(i, j)] -= upd;
                }
            }
        }
        // Q <- Q H
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += q[(i, j)] * v[j];
            }
            qv[i] = s * tau;
        }
        for i in 0..n {
            if qv[i].is_zero() {
                continue;
            }
            for j in k + 1..n {
                q[(i, j)] -= qv[i] * v[j].conj();
            }
        }
    }

    // Rotate sub-diagonal phases away so the tridiagonal matrix is real.
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut ph = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let ek = m[(k + 1, k)];
        let r = ek.norm();
        e[k + 1] = r;
        ph[k + 1] = if r > 0.0 { ph[k] * (ek / r) } else { ph[k] };
    }
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= ph[j];
        }
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n, a.as_mat().max_abs())?;

    // vectors = Q Z (Z real)
    let mut vecs = CMat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let qik = q[(i, k)];
            if qik.is_zero() {
                continue;
            }
            for j in 0..n {
                let zkj = z[k * n + j];
                if zkj != 0.0 {
                    vecs[(i, j)] += qik * zkj;
                }
            }
        }
    }
    Ok(Eigh { values: d, vectors: vecs })
}

/// Symmetric tridiagonal QL with implicit shifts (EISPACK tql2 lineage).
/// `e[i]` holds the sub-diagonal entry between rows i-1 and i; `z` is
/// row-major n x n and accumulates the rotations.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize, norm: f64) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(Error::NoConvergence { iterations: iter, dim: n, norm });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zi = z[k * n + i];
                        let zi1 = z[k * n + i + 1];
                        z[k * n + i + 1] = s * zi + c * zi1;
                        z[k * n + i] = c * zi - s * zi1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort ascending, carrying eigenvectors along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                z.swap(r * n + i, r * n + k);
            }
        }
    }
    Ok(())
}
