//! Small dense real kernels for the reduced KKT system.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub(crate) struct Sq {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Sq {
    pub fn zeros(n: usize) -> Self {
        Sq { n, a: vec![0.0; n * n] }
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators: faster and slightly more accurate than a single sum.
    let mut s = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        s[0] += a[k] * b[k];
        s[1] += a[k + 1] * b[k + 1];
        s[2] += a[k + 2] * b[k + 2];
        s[3] += a[k + 3] * b[k + 3];
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    for k in 4 * chunks..a.len() {
        t += a[k] * b[k];
    }
    t
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// In-place lower Cholesky. Pivots that fall below `floor` are replaced by
/// `floor` (dynamic regularization); returns how many were replaced.
pub(crate) fn cholesky_in_place(m: &mut Sq, floor: f64) -> usize {
    let n = m.n;
    let mut bumped = 0;
    for j in 0..n {
        let mut d = m.at(j, j);
        {
            let rj = &m.a[j * n..j * n + j];
            d -= dot(rj, rj);
        }
        if !(d > floor) {
            d = floor;
            bumped += 1;
        }
        let d = d.sqrt();
        m.set(j, j, d);
        for i in j + 1..n {
            let s = {
                let (ri, rj) = (&m.a[i * n..i * n + j], &m.a[j * n..j * n + j]);
                dot(ri, rj)
            };
            let v = (m.at(i, j) - s) / d;
            m.set(i, j, v);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, 0.0);
        }
    }
    bumped
}

/// Solve L y = b in place.
pub(crate) fn forward_solve(l: &Sq, b: &mut [f64]) {
    let n = l.n;
    for i in 0..n {
        let s = dot(&l.a[i * n..i * n + i], &b[..i]);
        b[i] = (b[i] - s) / l.at(i, i);
    }
}

/// Solve L Lᵀ x = b given the lower factor.
pub(crate) fn chol_solve(l: &Sq, b: &mut [f64]) {
    forward_solve(l, b);
    // Row-oriented back substitution keeps accesses to L contiguous.
    let n = l.n;
    for i in (0..n).rev() {
        let row = &l.a[i * n..i * n + i];
        let xi = b[i] / l.at(i, i);
        b[i] = xi;
        for (bk, &lik) in b[..i].iter_mut().zip(row) {
            *bk -= lik * xi;
        }
    }
}

/// Rank-revealing selection of linearly independent rows via modified
/// Gram-Schmidt with pivoting. Returns kept row indices (in original order)
/// and for every dropped row the least-squares residual of expressing it,
/// together with its right-hand side, in terms of the kept rows.
pub(crate) fn independent_rows(rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> (Vec<usize>, f64) {
    let p = rows.len();
    if p == 0 {
        return (Vec::new(), 0.0);
    }
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // Augmented rows [a_i, b_i] track consistency of the right-hand side.
    let mut work: Vec<Vec<f64>> = rows.to_vec();
    let mut work_rhs: Vec<f64> = rhs.to_vec();
    let mut kept = Vec::new();
    let mut remaining: Vec<usize> = (0..p).collect();
    loop {
        let best = remaining.iter().copied().map(|i| (i, norm(&work[i]))).fold(None, |acc: Option<(usize, f64)>, x| match acc {
            Some(a) if a.1 >= x.1 => Some(a),
            _ => Some(x),
        });
        let Some((bi, bn)) = best else { break };
        if bn <= tol * scale {
            break;
        }
        kept.push(bi);
        remaining.retain(|&i| i != bi);
        let q: Vec<f64> = work[bi].iter().map(|v| v / bn).collect();
        let qb = work_rhs[bi] / bn;
        for &i in &remaining {
            let c = dot(&work[i], &q);
            for (w, qv) in work[i].iter_mut().zip(&q) {
                *w -= c * qv;
            }
            work_rhs[i] -= c * qb;
        }
    }
    let inconsistency = remaining.iter().map(|&i| work_rhs[i].abs()).fold(0.0, f64::max);
    kept.sort_unstable();
    (kept, inconsistency)
}

/// LU factorization with partial pivoting, stored in place.
#[derive(Clone, Debug)]
pub(crate) struct Lu {
    m: Sq,
    piv: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot is exactly zero or not finite.
    pub fn new(mut m: Sq) -> Option<Lu> {
        let n = m.n;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m.at(i, k).abs().total_cmp(&m.at(j, k).abs()))?;
            let pv = m.at(p, k);
            if pv == 0.0 || !pv.is_finite() {
                return None;
            }
            if p != k {
                for c in 0..n {
                    m.a.swap(k * n + c, p * n + c);
                }
                piv.swap(k, p);
            }
            for i in k + 1..n {
                let l = m.at(i, k) / pv;
                m.set(i, k, l);
                if l == 0.0 {
                    continue;
                }
                for c in k + 1..n {
                    let v = m.at(i, c) - l * m.at(k, c);
                    m.set(i, c, v);
                }
            }
        }
        Some(Lu { m, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.m.a[i * n..i * n + i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.m.a[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.m.at(i, i);
        }
        x
    }
}
