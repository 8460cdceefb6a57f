#![allow(dead_code)]

use qcrb_core::linalg::{CMat, Hermitian, C64};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn random_cmat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gauss(r), gauss(r)))
}

pub fn random_hermitian(r: &mut ChaCha8Rng, d: usize) -> Hermitian {
    let g = random_cmat(r, d, d);
    Hermitian::symmetrize(&g + &g.adjoint())
}

pub fn random_density(r: &mut ChaCha8Rng, d: usize, rank: usize) -> Hermitian {
    let g = random_cmat(r, d, rank);
    let s = g.matmul(&g.adjoint());
    let t = s.trace().re;
    Hermitian::symmetrize(s.scale_real(1.0 / t))
}

/// Cyclic Jacobi eigenvalues of a Hermitian matrix, ascending. Independent
/// of the library's Householder/QL solver.
pub fn jacobi_eigenvalues(a: &Hermitian) -> Vec<f64> {
    let n = a.dim();
    let mut m = a.as_mat().clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off < 1e-30 * m.frobenius().powi(2).max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g < 1e-300 {
                    continue;
                }
                let ph = apq / g;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V = D J with D_qq = conj(ph); new A = V^H A V.
                let mut v = CMat::identity(n);
                v[(p, p)] = C64::new(c, 0.0);
                v[(p, q)] = C64::new(s, 0.0);
                v[(q, p)] = ph.conj() * -s;
                v[(q, q)] = ph.conj() * c;
                m = v.adjoint().matmul(&m).matmul(&v);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Random valid model: state of the given rank, derivatives drawn as
/// Gaussian Hermitian matrices with the kernel-kernel block removed and the
/// trace projected out along S.
pub fn random_model(r: &mut ChaCha8Rng, d: usize, rank: usize, n: usize) -> qcrb_core::model::StatisticalModel {
    use qcrb_core::model::{support_decomposition, StatisticalModel};
    let s = random_density(r, d, rank);
    let sd = support_decomposition(&s, 1e-10).unwrap();
    loop {
        let derivs: Vec<Hermitian> = (0..n)
            .map(|_| {
                let h = random_hermitian(r, d);
                let mut e = sd.to_eigenbasis(&h).into_mat();
                for a in sd.rank..d {
                    for b in sd.rank..d {
                        e[(a, b)] = C64::new(0.0, 0.0);
                    }
                }
                let h = sd.from_eigenbasis(&e);
                let t = h.tr();
                h.sub(&s.scale(t))
            })
            .collect();
        if let Ok(m) = StatisticalModel::new(s.clone(), derivs, "random") {
            return m;
        }
    }
}
