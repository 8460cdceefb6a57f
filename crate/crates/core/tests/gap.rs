mod common;

use core::f64::consts::FRAC_PI_2;

use common::{rng, random_hermitian, random_model as rand_model};
use proptest::prelude::*;
use qcrb_core::bounds::{a_matrix, equality_condition, hcrb, holevo_function, nagaoka_function, sld_function, unbiasedness_residual};
use qcrb_core::catalog::{
    bell_phase_damping, classical_diagonal, phase_diffusion, phase_diffusion_hcrb_oracle, phase_diffusion_holevo_optimizer_half_pi,
    qubit_sz,
};
use qcrb_core::error::Error;
use qcrb_core::gap::*;
use qcrb_core::linalg::{eigh, embed_at, pauli, tensor_power, Hermitian, SIZE_CAP};
use qcrb_core::model::{sld_operators, sld_optimizer, tensor_power_model, StatisticalModel, WeightMatrix};
use qcrb_core::sdp::{SolverSettings, Status};

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn ident(n: usize) -> WeightMatrix {
    WeightMatrix::identity(n)
}

/// A locally unbiased estimator set: the SLD optimizer plus a random
/// direction orthogonal to every unbiasedness constraint.
fn unbiased_estimators(m: &StatisticalModel, seed: u64) -> Vec<Hermitian> {
    let base = sld_optimizer(&sld_operators(m).unwrap()).unwrap();
    let mut r = rng(seed);
    // Project random Hermitian noise off span{S, S_j} in the Hilbert-Schmidt
    // inner product by Gram-Schmidt.
    let mut cons: Vec<Hermitian> = Vec::new();
    for c in core::iter::once(m.state().clone()).chain(m.derivs().iter().cloned()) {
        let mut v = c;
        for u in &cons {
            v = v.sub(&u.scale(u.dot(&v)));
        }
        let nrm = v.dot(&v).sqrt();
        cons.push(v.scale(1.0 / nrm));
    }
    base.iter()
        .map(|b| {
            let mut h = random_hermitian(&mut r, m.dim()).scale(0.3);
            for u in &cons {
                h = h.sub(&u.scale(u.dot(&h)));
            }
            b.add(&h)
        })
        .collect()
}

#[test]
fn one_copy_lift_is_identity() {
    let m = qubit_sz(0.4).unwrap();
    let x = unbiased_estimators(&m, 1);
    let y = mcopy_estimators(&x, 1).unwrap();
    for (a, b) in x.iter().zip(&y) {
        assert_eq!(a.as_mat().max_abs(), b.as_mat().max_abs());
        assert!(a.sub(b).as_mat().max_abs() == 0.0);
    }
    assert!(matches!(mcopy_estimators(&x, 0), Err(Error::Domain(_))));
}

#[test]
fn lifted_estimators_scale_functions() {
    for (seed, d, rank) in [(3u64, 2usize, 2usize), (4, 3, 3), (5, 3, 2)] {
        let mut r = rng(seed);
        let m = rand_model(&mut r, d, rank, 2);
        let x = unbiased_estimators(&m, seed + 100);
        assert!(unbiasedness_residual(&m, &x) < 1e-9);
        for copies in [2usize, 3] {
            let mm = tensor_power_model(&m, copies).unwrap();
            let xm = mcopy_estimators(&x, copies).unwrap();
            assert!(unbiasedness_residual(&mm, &xm) < 1e-9);
            let c = copies as f64;
            let h1 = holevo_function(&m, &x, &ident(2)).unwrap();
            let hm = holevo_function(&mm, &xm, &ident(2)).unwrap();
            assert!((hm - h1 / c).abs() < 1e-9, "holevo {hm} vs {}", h1 / c);
            let s1 = sld_function(&m, &x).unwrap();
            let sm = sld_function(&mm, &xm).unwrap();
            assert!((sm - s1 / c).abs() < 1e-9);
        }
    }
}

#[test]
fn lift_respects_size_cap() {
    let x = vec![pauli()[0].clone(), pauli()[1].clone()];
    assert!(matches!(mcopy_estimators(&x, 13), Err(Error::SizeLimit { .. })));
}

#[test]
fn a_matrix_equality_condition_examples() {
    let m = classical_diagonal(&[0.2, 0.3, 0.5], &[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]).unwrap();
    let x = vec![Hermitian::diag(&[1.0, 0.0, 2.0]), Hermitian::diag(&[-1.0, 3.0, 0.5])];
    let a = a_matrix(&m, &x).unwrap();
    assert!(a.as_mat().max_abs() < 1e-15);
    let (eq, p, q) = equality_condition(&m, &x).unwrap();
    assert!(eq && p.abs() < 1e-15 && q.abs() < 1e-15);

    // Pure state: A has at most one nonzero eigenvalue.
    let mut r = rng(7);
    let pure = rand_model(&mut r, 3, 1, 2);
    let x = vec![random_hermitian(&mut r, 3), random_hermitian(&mut r, 3)];
    let (eq, p, q) = equality_condition(&pure, &x).unwrap();
    assert!(eq, "tr A+ = {p}, tr A- = {q}");

    // Full-rank qubit with (σ_x, σ_y): √S σ_z √S is indefinite.
    let m = qubit_sz(0.5).unwrap();
    let x = vec![pauli()[0].clone(), pauli()[1].clone()];
    let (eq, p, q) = equality_condition(&m, &x).unwrap();
    assert!(!eq && p > 0.1 && q > 0.1);
}

#[test]
fn two_copy_a_decomposition() {
    for (seed, d) in [(11u64, 2usize), (12, 3), (13, 3)] {
        let mut r = rng(seed);
        let m = rand_model(&mut r, d, d, 2);
        let x = unbiased_estimators(&m, seed);
        assert!(two_copy_a_decomposition_check(&m, &x).unwrap() < 1e-9);
    }
    let mc = classical_diagonal(&[0.2, 0.3, 0.5], &[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]).unwrap();
    let x = vec![Hermitian::diag(&[1.0, 0.0, 2.0]), Hermitian::diag(&[-1.0, 3.0, 0.5])];
    assert!(two_copy_a_decomposition_check(&mc, &x).unwrap() < 1e-15);
    let pd = phase_diffusion(FRAC_PI_2, 0.0, 1.0).unwrap();
    let xh = phase_diffusion_holevo_optimizer_half_pi(1.0).to_vec();
    assert!(two_copy_a_decomposition_check(&pd, &xh).unwrap() < 1e-9);
}

#[test]
fn gap_report_phase_diffusion_persists() {
    let m = phase_diffusion(0.3, 0.0, 0.3).unwrap();
    let rep = gap_report(&m, GapPair::NagaokaHolevo, &[1, 2], &ident(2), &settings());
    assert_eq!(rep.verdict, Verdict::Persists);
    for e in rep.entries.iter().map(|e| e.as_ref().unwrap()) {
        assert!((e.gap - (e.upper - e.lower)).abs() <= 1e-10);
        let c = e.copies as f64;
        assert!((e.scaled.0 - c * e.upper).abs() <= 1e-10 * e.scaled.0.abs());
        assert_eq!(e.status, (Status::Optimal, Status::Optimal));
    }
    assert!(rep.gap(1).unwrap() > 1e-4);
    assert!(rep.gap(2).unwrap() > 1e-7);
    assert!(rep.gap(3).is_none());
}

#[test]
fn gap_report_classical_is_zero() {
    let m = classical_diagonal(&[0.2, 0.3, 0.5], &[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]).unwrap();
    for pair in [GapPair::NagaokaHolevo, GapPair::HolevoSld, GapPair::NagaokaHayashiSld] {
        let rep = gap_report(&m, pair, &[1, 2], &ident(2), &settings());
        assert_eq!(rep.verdict, Verdict::BelowTolerance, "{}", pair.as_str());
        assert!(rep.gap(1).unwrap().abs() < 1e-7);
        assert!(rep.gap(2).unwrap().abs() < 1e-7);
    }
}

#[test]
fn gap_report_bell() {
    let m = bell_phase_damping(0.5).unwrap();
    let rep = gap_report(&m, GapPair::NagaokaHayashiHolevo, &[1, 2], &ident(3), &settings());
    assert!((rep.gap(1).unwrap() - 2.0 / 3.0).abs() < 1e-5);
    assert!(rep.gap(2).unwrap() > 1e-7);
    assert_eq!(rep.verdict, Verdict::Persists);
}

#[test]
fn gap_report_partial_on_size_limit() {
    let m = qubit_sz(0.5).unwrap();
    let rep = gap_report(&m, GapPair::HolevoSld, &[1, 13], &ident(2), &settings());
    assert!(rep.entries[0].is_ok());
    assert!(matches!(&rep.entries[1], Err((13, _))));
    assert_eq!(rep.verdict, Verdict::Incomplete);
}

#[test]
fn gap_pair_names_round_trip() {
    for p in [GapPair::NagaokaHolevo, GapPair::NagaokaHayashiSld, GapPair::NagaokaHayashiHolevo, GapPair::HolevoSld] {
        assert_eq!(GapPair::parse(p.as_str()), Some(p));
    }
    assert_eq!(GapPair::parse("X-Y"), None);
}

#[test]
fn bm_commuting_is_first_term() {
    let m = classical_diagonal(&[0.2, 0.3, 0.5], &[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]).unwrap();
    let x = vec![Hermitian::diag(&[1.0, 0.0, 2.0]), Hermitian::diag(&[-1.0, 3.0, 0.5])];
    let first = sld_function(&m, &x).unwrap();
    for copies in [1usize, 5, 50] {
        let b = bm_lower_bound(&m, &x, copies).unwrap();
        assert!((b - first / copies as f64).abs() < 1e-14);
    }
}

#[test]
fn bm_rejects_singular_and_wrong_arity() {
    let mut r = rng(21);
    let pure = rand_model(&mut r, 2, 1, 2);
    let x = vec![pauli()[0].clone(), pauli()[1].clone()];
    assert!(matches!(bm_lower_bound(&pure, &x, 2), Err(Error::SingularState)));
    let three = bell_phase_damping(0.3).unwrap();
    assert!(matches!(bm_parts(&three, &x, 2), Err(Error::WrongArity { .. })));
}

#[test]
fn bm_below_direct_nagaoka() {
    for seed in 30..34u64 {
        let mut r = rng(seed);
        let m = rand_model(&mut r, 2, 2, 2);
        let x = unbiased_estimators(&m, seed);
        for copies in 1..=4usize {
            let mm = tensor_power_model(&m, copies).unwrap();
            let xm = mcopy_estimators(&x, copies).unwrap();
            let direct = nagaoka_function(&mm, &xm).unwrap();
            let b = bm_lower_bound(&m, &x, copies).unwrap();
            assert!(b <= direct + 1e-9, "seed {seed} M {copies}: {b} > {direct}");
        }
    }
}

#[test]
fn bm_margin_positive_up_to_hundred_copies() {
    let delta = 1.0;
    let m = phase_diffusion(FRAC_PI_2, 0.0, delta).unwrap();
    let x = phase_diffusion_holevo_optimizer_half_pi(delta).to_vec();
    let fh = holevo_function(&m, &x, &ident(2)).unwrap();
    assert!((fh - phase_diffusion_hcrb_oracle(FRAC_PI_2, delta)).abs() < 1e-9);
    // The analytic optimizer satisfies tr A(X) = 0.
    let tr_a = a_matrix(&m, &x).unwrap().tr();
    assert!(tr_a.abs() < 1e-12);
    for copies in 1..=100usize {
        let parts = bm_parts(&m, &x, copies).unwrap();
        let margin = bm_margin(&parts, 0.0, copies);
        assert!(margin > 0.0, "M = {copies}: margin {margin}");
        if copies <= 10 {
            let direct = parts.value() - fh / copies as f64;
            assert!((direct - margin).abs() < 1e-12);
        }
    }
}

/// Brute-force trabs(S^{⊗M} Σ σ_z^{(i)}) by building the operator.
fn brute_trabs_sz(s_z: f64, copies: usize) -> f64 {
    let [_, _, z] = pauli();
    let s = Hermitian::identity(2).add(&z.scale(s_z)).scale(0.5);
    let sm = tensor_power(s.as_mat(), copies, SIZE_CAP).unwrap();
    let mut sum = embed_at(&z, 1, copies, SIZE_CAP).unwrap();
    for k in 2..=copies {
        sum = sum.add(&embed_at(&z, k, copies, SIZE_CAP).unwrap());
    }
    let op = sm.matmul(sum.as_mat());
    if copies <= 7 {
        let h = Hermitian::symmetrize(op);
        eigh(&h).unwrap().values.iter().map(|v| v.abs()).sum()
    } else {
        // The operator is diagonal; its eigenvalues are the diagonal.
        assert!(op.max_abs() > 0.0 || s_z.abs() == 1.0);
        (0..op.rows()).map(|i| op[(i, i)].re.abs()).sum()
    }
}

#[test]
fn trabs_sz_examples() {
    assert!((trabs_sz_sum(0.5, 1).unwrap() - 1.0).abs() < 1e-14);
    assert!((trabs_sz_sum(0.5, 2).unwrap() - 1.25).abs() < 1e-14);
    assert!((sz_ncrb_upper(0.5, 1).unwrap() - 4.0).abs() < 1e-14);
    let m = qubit_sz(0.5).unwrap();
    // The model derivatives are σ/2, so the unbiased estimators are σ.
    let x = vec![pauli()[0].clone(), pauli()[1].clone()];
    assert!((nagaoka_function(&m, &x).unwrap() - 4.0).abs() < 1e-12);
    assert!(trabs_sz_sum(1.5, 2).is_err());
    assert!(trabs_sz_sum(0.5, 0).is_err());
}

#[test]
fn trabs_sz_matches_brute_force() {
    for s in [0.0, 0.3, -0.3, 0.9, -0.9] {
        for copies in 1..=10usize {
            let want = brute_trabs_sz(s, copies);
            let got = trabs_sz_sum(s, copies).unwrap();
            assert!((got - want).abs() < 1e-12, "s {s} M {copies}: {got} vs {want}");
        }
    }
}

#[test]
fn trabs_sz_per_copy_limit() {
    let s = 0.6;
    let per: Vec<f64> = (1..=50).map(|m| trabs_sz_sum(s, m).unwrap() / m as f64).collect();
    assert!((per[49] - s).abs() < 0.05);
    // |(1/M) sum − |s_z|| shrinks along the tail.
    let dev: Vec<f64> = per.iter().map(|p| (p - s).abs()).collect();
    for m in 10..49 {
        assert!(dev[m + 1] <= dev[m - 1] + 1e-15, "M {}", m + 1);
    }
    let zero = trabs_sz_sum(0.0, 400).unwrap() / 400.0;
    assert!(zero < 0.05);
    // Log-space accumulation stays finite far beyond the brute-force range.
    let big = trabs_sz_sum(0.6, 2000).unwrap() / 2000.0;
    assert!(big.is_finite() && (big - 0.6).abs() < 0.01);
}

#[test]
fn sz_upper_approaches_holevo() {
    let s = 0.5;
    let h = qubit_sz_hcrb(s);
    let scaled: Vec<f64> = [2usize, 4, 10, 60].iter().map(|&m| m as f64 * sz_ncrb_upper(s, m).unwrap()).collect();
    for w in scaled.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!((scaled[3] - h).abs() < 0.1);
    for s in [0.1, 0.5, 0.9, -0.7] {
        for m in [1usize, 2, 3, 7, 20, 60, 200] {
            assert!(sz_ncrb_upper(s, m).unwrap() >= qubit_sz_hcrb(s) / m as f64 - 1e-14);
        }
    }
    // One copy matches the SDP Holevo bound from above.
    let sdp = hcrb(&qubit_sz(s).unwrap(), &ident(2), &settings()).unwrap();
    assert!(sz_ncrb_upper(s, 1).unwrap() >= sdp.value);
}

fn qubit_sz_hcrb(s: f64) -> f64 {
    2.0 + 2.0 * s.abs()
}

#[test]
fn random_model_spec_validation() {
    let ok = RandomModelSpec { dim: 3, rank: 2, n_params: 3, trials: 2, seed: 1 };
    assert!(ok.validate().is_ok());
    for bad in [
        RandomModelSpec { rank: 0, ..ok },
        RandomModelSpec { rank: 4, ..ok },
        RandomModelSpec { n_params: 0, ..ok },
        RandomModelSpec { dim: 2, rank: 1, n_params: 3, ..ok },
        RandomModelSpec { n_params: 9, rank: 3, ..ok },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
        assert!(random_model(&bad).is_err());
    }
}

#[test]
fn random_model_is_reproducible() {
    let spec = RandomModelSpec { dim: 3, rank: 3, n_params: 2, trials: 4, seed: 99 };
    let a = random_model(&spec).unwrap();
    let b = random_model(&spec).unwrap();
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert!(x.state().sub(y.state()).as_mat().max_abs() == 0.0);
        for (p, q) in x.derivs().iter().zip(y.derivs()) {
            assert!(p.sub(q).as_mat().max_abs() == 0.0);
        }
    }
    // A single trial does not depend on the others.
    let t2 = random_model_trial(&spec, 2).unwrap();
    assert!(t2.state().sub(a[2].state()).as_mat().max_abs() == 0.0);
    let other = random_model(&RandomModelSpec { seed: 100, ..spec }).unwrap();
    assert!(other[0].state().sub(a[0].state()).as_mat().max_abs() > 1e-3);
}

#[test]
fn random_model_rank_and_consistency() {
    for (d, r) in [(2usize, 2usize), (4, 4), (4, 2), (3, 1)] {
        let spec = RandomModelSpec { dim: d, rank: r, n_params: 2, trials: 3, seed: 5 };
        for m in random_model(&spec).unwrap() {
            let ev = eigh(m.state()).unwrap().values;
            let positive = ev.iter().filter(|&&v| v > 1e-10).count();
            assert_eq!(positive, r);
            assert!((m.state().tr() - 1.0).abs() < 1e-12);
            for dj in m.derivs() {
                assert!(dj.tr().abs() < 1e-12);
            }
            m.validate().unwrap();
        }
    }
}

#[test]
fn random_gap_in_unit_interval() {
    for d in 2..=4usize {
        let spec = RandomModelSpec { dim: d, rank: d, n_params: 2, trials: 8, seed: 2024 };
        for t in 0..spec.trials {
            let row = random_gap_row(&spec, t, &settings()).unwrap();
            assert_eq!(row.status, Status::Optimal);
            assert!(row.rel_gap > 0.0 && row.rel_gap <= 1.0 + 1e-7, "d {d} trial {t}: {}", row.rel_gap);
            assert!((row.rel_gap - (row.ncrb - row.hcrb) / row.hcrb).abs() < 1e-14);
        }
    }
}

#[test]
fn persistence_scatter_rows() {
    let spec = RandomModelSpec { dim: 2, rank: 2, n_params: 2, trials: 4, seed: 17 };
    let rows = persistence_scatter(&spec, 2, &settings());
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!((row.trial, row.d, row.r, row.n), (i, 2, 2, 2));
        assert_eq!(row.status1, Status::Optimal);
        assert_eq!(row.status2, Status::Optimal);
        // Both gaps are nonnegative up to solver tolerance.
        assert!(row.gap1_half > -1e-7 && row.gap2 > -1e-7);
        if row.gap1_half > 1e-4 {
            assert!(row.gap2 > 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifted_holevo_scaling_prop(seed in 0u64..10_000, d in 2usize..4) {
        let mut r = rng(seed);
        let m = rand_model(&mut r, d, d, 2);
        let x = unbiased_estimators(&m, seed ^ 0xabc);
        let mm = tensor_power_model(&m, 2).unwrap();
        let xm = mcopy_estimators(&x, 2).unwrap();
        let h1 = holevo_function(&m, &x, &ident(2)).unwrap();
        let h2 = holevo_function(&mm, &xm, &ident(2)).unwrap();
        prop_assert!((h2 - h1 / 2.0).abs() < 1e-9 * h1.max(1.0));
        prop_assert!(two_copy_a_decomposition_check(&m, &x).unwrap() < 1e-9 * h1.max(1.0));
    }

    #[test]
    fn trabs_sz_bounds_prop(s in -1.0f64..1.0, copies in 1usize..300) {
        let v = trabs_sz_sum(s, copies).unwrap();
        let mf = copies as f64;
        // |s_z| M ≤ sum ≤ M: the mean of |M/2 − j| dominates |mean|.
        prop_assert!(v >= s.abs() * mf - 1e-9 * mf);
        prop_assert!(v <= mf + 1e-9 * mf);
    }
}
