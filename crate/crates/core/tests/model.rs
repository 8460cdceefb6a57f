mod common;

use common::{random_hermitian, random_model, rng};
use proptest::prelude::*;
use qcrb_core::linalg::{pauli, CMat, Hermitian, C64};
use qcrb_core::model::*;
use qcrb_core::Error;

fn qubit_sz(s: f64) -> StatisticalModel {
    let [x, y, z] = pauli();
    let state = Hermitian::identity(2).add(&z.scale(s)).scale(0.5);
    StatisticalModel::new(state, vec![x.scale(0.5), y.scale(0.5)], "sz").unwrap()
}

fn close(a: &Hermitian, b: &Hermitian, tol: f64) -> bool {
    a.sub(b).max_abs() <= tol
}

#[test]
fn support_of_full_rank_and_pure_states() {
    let full = support_decomposition(&Hermitian::diag(&[0.7, 0.3]), 1e-10).unwrap();
    assert_eq!(full.rank, 2);
    assert!(close(&full.support_projector, &Hermitian::identity(2), 1e-12));

    let pure = support_decomposition(&Hermitian::diag(&[1.0, 0.0]), 1e-10).unwrap();
    assert_eq!(pure.rank, 1);
    assert!(close(&pure.kernel_projector, &Hermitian::diag(&[0.0, 1.0]), 1e-12));
}

#[test]
fn projectors_are_complementary() {
    let mut r = rng(1);
    for rank in 1..=4 {
        let s = common::random_density(&mut r, 4, rank);
        let sd = support_decomposition(&s, 1e-10).unwrap();
        assert_eq!(sd.rank, rank);
        let p = &sd.support_projector;
        let k = &sd.kernel_projector;
        assert!(close(&p.add(k), &Hermitian::identity(4), 1e-10));
        assert!(p.as_mat().matmul(k.as_mat()).max_abs() < 1e-10);
        assert!((&p.as_mat().matmul(p.as_mat()) - p.as_mat()).max_abs() < 1e-10);
        assert!(sd.values.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn qubit_sz_slds() {
    let m = qubit_sz(0.5);
    let set = sld_operators(&m).unwrap();
    let [x, y, _] = pauli();
    assert!(close(&set.slds[0], &x, 1e-12));
    assert!(close(&set.slds[1], &y, 1e-12));
    for (k, v) in set.fisher.iter().enumerate() {
        let want = if k % 3 == 0 { 1.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-12);
    }
    assert!((sldcrb(&m, &WeightMatrix::identity(2)).unwrap() - 2.0).abs() < 1e-12);
    let w2 = WeightMatrix::diag(&[2.0, 2.0]).unwrap();
    assert!((sldcrb(&m, &w2).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn lyapunov_residual_on_random_models() {
    let mut r = rng(2);
    for case in 0..40 {
        let d = 2 + case % 4;
        let rank = 1 + case % d;
        let m = random_model(&mut r, d, rank, 2 + case % 2);
        let set = sld_operators(&m).unwrap();
        let s = m.state().as_mat();
        for (l, si) in set.slds.iter().zip(m.derivs()) {
            let lyap = (&s.matmul(l.as_mat()) + &l.as_mat().matmul(s)).scale_real(0.5);
            assert!((&lyap - si.as_mat()).frobenius() < 1e-8);
        }
        let sd = support_decomposition(m.state(), 1e-10).unwrap();
        for l in &set.slds {
            assert!(sd.kernel_block_norm(l) < 1e-10);
        }
        // Fisher matrix: Re tr(S L_i L_j) equals tr(S_i L_j).
        let n = set.n();
        for i in 0..n {
            for j in 0..n {
                let alt = m.derivs()[i].dot(&set.slds[j]);
                assert!((set.fisher[i * n + j] - alt).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sld_unique_modulo_kernel_block() {
    let mut r = rng(3);
    for _ in 0..10 {
        let m = random_model(&mut r, 4, 2, 2);
        let set = sld_operators(&m).unwrap();
        let sd = support_decomposition(m.state(), 1e-10).unwrap();
        let qb = quotient_basis(&m).unwrap();
        for l in &set.slds {
            // Any kernel-kernel perturbation keeps the Lyapunov equation.
            let mut e = CMat::zeros(4, 4);
            let h = random_hermitian(&mut r, 2);
            e.set_block(2, 2, h.as_mat());
            let pert = l.add(&sd.from_eigenbasis(&e));
            let s = m.state().as_mat();
            let lhs = |x: &Hermitian| (&s.matmul(x.as_mat()) + &x.as_mat().matmul(s)).scale_real(0.5);
            assert!((&lhs(&pert) - &lhs(l)).max_abs() < 1e-10);
            // Re-projecting onto the quotient recovers the same class.
            let back = qb.combine(&qb.coordinates(&pert));
            assert!(close(&back, l, 1e-10));
        }
    }
}

#[test]
fn classical_diagonal_matches_multinomial_fisher() {
    let p = [0.5, 0.3, 0.2];
    let d1 = [0.5, -0.5, 0.0];
    let d2 = [0.0, 0.5, -0.5];
    let m = StatisticalModel::new(Hermitian::diag(&p), vec![Hermitian::diag(&d1), Hermitian::diag(&d2)], "cl").unwrap();
    let set = sld_operators(&m).unwrap();
    for l in &set.slds {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(l[(i, j)].norm() < 1e-14);
                }
            }
        }
    }
    let c = CMat::commutator(set.slds[0].as_mat(), set.slds[1].as_mat());
    assert!(c.max_abs() < 1e-14);
    let dirs = [d1, d2];
    let mut j = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            j[a * 2 + b] = (0..3).map(|k| dirs[a][k] * dirs[b][k] / p[k]).sum();
        }
    }
    let det = j[0] * j[3] - j[1] * j[2];
    let want = (j[0] + j[3]) / det;
    assert!((sldcrb(&m, &WeightMatrix::identity(2)).unwrap() - want).abs() < 1e-12);
    let (flag, v) = quasiclassicality_test(&m).unwrap();
    assert!(flag && v < 1e-12);
}

#[test]
fn quasiclassicality_of_qubit_sz() {
    // i[σx, σy] = -2σz and tr|√S σz √S| = 1, so the value is 2.
    let (flag, v) = quasiclassicality_test(&qubit_sz(0.5)).unwrap();
    assert!(!flag);
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn tensor_power_fisher_additivity() {
    let mut r = rng(4);
    let m1 = qubit_sz(0.3);
    assert_eq!(tensor_power_model(&m1, 1).unwrap().state().as_mat(), m1.state().as_mat());
    for case in 0..8 {
        let d = 2 + case % 2;
        let m = random_model(&mut r, d, d, 2);
        let j1 = sld_operators(&m).unwrap().fisher;
        let c1 = sldcrb(&m, &WeightMatrix::identity(2)).unwrap();
        for copies in [2, 3] {
            let mm = tensor_power_model(&m, copies).unwrap();
            assert_eq!(mm.copies(), copies);
            for s in mm.derivs() {
                assert!(s.tr().abs() < 1e-12);
            }
            let jm = sld_operators(&mm).unwrap().fisher;
            for (a, b) in jm.iter().zip(&j1) {
                assert!((a - copies as f64 * b).abs() < 1e-8 * b.abs().max(1.0));
            }
            let cm = sldcrb(&mm, &WeightMatrix::identity(2)).unwrap();
            assert!((cm - c1 / copies as f64).abs() < 1e-8 * c1);
        }
    }
}

#[test]
fn tensor_power_respects_size_cap() {
    let m = qubit_sz(0.5);
    assert!(matches!(tensor_power_model(&m, 13), Err(Error::SizeLimit { .. })));
}

#[test]
fn reparameterize_contract() {
    let m = qubit_sz(0.5);
    let same = reparameterize(&m, &WeightMatrix::identity(2)).unwrap();
    assert!(close(&same.derivs()[0], &m.derivs()[0], 0.0));
    let w = WeightMatrix::diag(&[4.0, 1.0]).unwrap();
    let rm = reparameterize(&m, &w).unwrap();
    assert!((sldcrb(&rm, &WeightMatrix::identity(2)).unwrap() - 5.0).abs() < 1e-12);

    let mut r = rng(5);
    for _ in 0..20 {
        let m = random_model(&mut r, 2, 2, 2);
        let g = common::random_cmat(&mut r, 2, 2);
        let a = g.matmul(&g.adjoint());
        let w = WeightMatrix::new(2, vec![a[(0, 0)].re + 0.1, a[(0, 1)].re, a[(0, 1)].re, a[(1, 1)].re + 0.1]).unwrap();
        let lhs = sldcrb(&reparameterize(&m, &w).unwrap(), &WeightMatrix::identity(2)).unwrap();
        let rhs = sldcrb(&m, &w).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }
    assert!(WeightMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
}

#[test]
fn quotient_basis_sizes_and_orthonormality() {
    assert_eq!(quotient_basis(&qubit_sz(0.5)).unwrap().len(), 4);
    let [x, y, _] = pauli();
    let pure = StatisticalModel::new(Hermitian::diag(&[1.0, 0.0]), vec![x, y], "pure").unwrap();
    assert_eq!(quotient_basis(&pure).unwrap().len(), 3);
    let mut r = rng(6);
    let m = random_model(&mut r, 3, 2, 2);
    let qb = quotient_basis(&m).unwrap();
    assert_eq!(qb.len(), 8);
    let els = qb.elements_original();
    let sd = support_decomposition(m.state(), 1e-10).unwrap();
    for (i, a) in els.iter().enumerate() {
        assert!(sd.kernel_block_norm(a) < 1e-12);
        for (j, b) in els.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((a.dot(b) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn validation_rejects_bad_models() {
    let [x, y, z] = pauli();
    let bad_trace = StatisticalModel::new(Hermitian::diag(&[0.6, 0.6]), vec![x.clone()], "t");
    assert!(matches!(bad_trace, Err(Error::InvalidModel(_))));
    let not_psd = StatisticalModel::new(Hermitian::diag(&[1.2, -0.2]), vec![x.clone()], "p");
    assert!(matches!(not_psd, Err(Error::NotPsd { .. })));
    let dependent = StatisticalModel::new(Hermitian::diag(&[0.5, 0.5]), vec![x.clone(), x.scale(2.0)], "dep");
    assert!(matches!(dependent, Err(Error::InvalidModel(_))));
    let traceful = StatisticalModel::new(Hermitian::diag(&[0.5, 0.5]), vec![Hermitian::identity(2)], "tr");
    assert!(matches!(traceful, Err(Error::InvalidModel(_))));
    // A derivative with weight on the kernel-kernel block of a pure state.
    let leak = StatisticalModel::new(Hermitian::diag(&[1.0, 0.0]), vec![z, y], "leak");
    assert!(matches!(leak, Err(Error::ModelInconsistent { index: 0, .. })));
}

#[test]
fn singular_fisher_detected() {
    // Derivative that only moves the kernel-support phase of a pure state
    // with zero weight: build a full-rank state whose derivative is tiny.
    let s = Hermitian::diag(&[0.5, 0.5]);
    let m = StatisticalModel::new(s, vec![pauli()[0].scale(1e-7)], "tiny").unwrap();
    assert!(matches!(sld_operators(&m), Err(Error::SingularFisher(_))));
}

#[test]
fn finite_differences() {
    let [x, y, z] = pauli();
    // Linear family: exact.
    let base = Hermitian::identity(2).add(&z.scale(0.3)).scale(0.5);
    let (xx, yy) = (x.clone(), y.clone());
    let f = move |t: &[f64]| Ok(base.add(&xx.scale(0.5 * t[0])).add(&yy.scale(0.5 * t[1])));
    let fd = finite_difference_derivs(f, &[0.0, 0.0], 1e-5).unwrap();
    assert!(close(&fd.derivs[0], &x.scale(0.5), 1e-10));
    assert!(close(&fd.derivs[1], &y.scale(0.5), 1e-10));
    assert!(fd.discrepancy < 1e-9);

    // Nonlinear rotation family against the analytic derivative.
    let g = |t: &[f64]| {
        let (c, s) = (t[0].cos(), t[0].sin());
        let bloch = [0.6 * s, 0.0, 0.6 * c];
        let [x, _, z] = pauli();
        Ok(Hermitian::identity(2).add(&x.scale(bloch[0])).add(&z.scale(bloch[2])).scale(0.5))
    };
    let fd = finite_difference_derivs(g, &[0.4], 1e-5).unwrap();
    let want = x.scale(0.3 * 0.4f64.cos()).sub(&z.scale(0.3 * 0.4f64.sin()));
    assert!(close(&fd.derivs[0], &want, 1e-9));

    // Constant family: zero derivatives, rejected by validation.
    let c = |_: &[f64]| Ok(Hermitian::diag(&[0.5, 0.5]));
    let fd = finite_difference_derivs(c, &[0.1], 1e-5).unwrap();
    assert!(fd.derivs[0].max_abs() == 0.0);
    assert!(StatisticalModel::new(Hermitian::diag(&[0.5, 0.5]), fd.derivs, "const").is_err());

    // Non-density output at a probe point.
    let bad = |t: &[f64]| Ok(Hermitian::diag(&[0.5 + t[0], 0.5]));
    assert!(finite_difference_derivs(bad, &[0.0], 1e-5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quotient_coordinates_round_trip(seed in 0u64..1000, rank in 1usize..4) {
        let mut r = rng(seed);
        let m = random_model(&mut r, 3, rank, 2);
        let qb = quotient_basis(&m).unwrap();
        let sd = &qb.support;
        let h = random_hermitian(&mut r, 3);
        // Strip the kernel block so the round trip is exact.
        let mut e = sd.to_eigenbasis(&h).into_mat();
        for a in sd.rank..3 {
            for b in sd.rank..3 {
                e[(a, b)] = C64::new(0.0, 0.0);
            }
        }
        let h = sd.from_eigenbasis(&e);
        let back = qb.combine(&qb.coordinates(&h));
        prop_assert!(back.sub(&h).max_abs() < 1e-10);
    }

    #[test]
    fn sldcrb_linear_in_weight(seed in 0u64..1000, a in 0.1f64..5.0) {
        let mut r = rng(seed);
        let m = random_model(&mut r, 2, 2, 2);
        let base = sldcrb(&m, &WeightMatrix::identity(2)).unwrap();
        let scaled = sldcrb(&m, &WeightMatrix::diag(&[a, a]).unwrap()).unwrap();
        prop_assert!((scaled - a * base).abs() < 1e-9 * scaled.max(1.0));
    }
}
