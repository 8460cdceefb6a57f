use proptest::prelude::*;
use qcrb::format::{fmt12, model_to_string, parse_model, program_to_json, BoundRecord, ModelFile};
use qcrb_core::bounds::{bound_program, hcrb, BoundKind};
use qcrb_core::gap::{random_model_trial, RandomModelSpec};
use qcrb_core::model::WeightMatrix;
use qcrb_core::sdp::{solve, SolverSettings};

// Bitwise equality, with the sign of zero ignored (import clears diagonal imaginary parts).
fn same_bits(a: &qcrb_core::linalg::Hermitian, b: &qcrb_core::linalg::Hermitian) -> bool {
    let (x, y) = (a.as_mat(), b.as_mat());
    let eq = |p: f64, q: f64| (p + 0.0).to_bits() == (q + 0.0).to_bits();
    (0..x.rows()).all(|i| (0..x.cols()).all(|j| eq(x[(i, j)].re, y[(i, j)].re) && eq(x[(i, j)].im, y[(i, j)].im)))
}

#[test]
fn bound_record_from_solve() {
    let m = qcrb_core::catalog::qubit_sz(0.5).unwrap();
    let r = hcrb(&m, &WeightMatrix::identity(2), &SolverSettings::default()).unwrap();
    let rec = BoundRecord::from_result(&r);
    assert_eq!(rec.bound, "hcrb");
    assert_eq!(rec.status, "optimal");
    assert_eq!(rec.optimizer.len(), 2);
    let back: BoundRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
    assert_eq!(back.value, rec.value);
    let failed = serde_json::to_value(BoundRecord::failed("ncrb", 2, "boom")).unwrap();
    assert!(failed["value"].is_null());
    assert_eq!(failed["status"], "error: boom");
}

#[test]
fn dumped_program_re_solves_to_the_same_value() {
    // Rebuild the program from its JSON dump and solve it again.
    let m = qcrb_core::catalog::phase_diffusion(1.0, 0.0, 0.4).unwrap();
    let w = WeightMatrix::identity(2);
    let p = bound_program(BoundKind::Nagaoka, &m, &w).unwrap();
    let v = program_to_json(&p);
    let n = v["n_vars"].as_u64().unwrap() as usize;
    let mut q = qcrb_core::sdp::ConicProgram::new(n);
    q.c = v["c"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let rhs: Vec<f64> = v["b"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let mut rows = vec![Vec::new(); rhs.len()];
    for t in v["A"].as_array().unwrap() {
        rows[t[0].as_u64().unwrap() as usize].push((t[1].as_u64().unwrap() as usize, t[2].as_f64().unwrap()));
    }
    for (row, b) in rows.into_iter().zip(rhs) {
        q.add_equality(row, b);
    }
    for b in v["blocks"].as_array().unwrap() {
        let field = if b["field"] == "complex" { qcrb_core::sdp::Field::Complex } else { qcrb_core::sdp::Field::Real };
        let k = q.add_block(b["dim"].as_u64().unwrap() as usize, field);
        q.blocks[k].constant = b["constant"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for t in b["coeffs"].as_array().unwrap() {
            q.blocks[k].coeffs[t[0].as_u64().unwrap() as usize].push((t[1].as_u64().unwrap() as usize, t[2].as_f64().unwrap()));
        }
    }
    let s = solve(&q, &SolverSettings::default()).unwrap();
    let want = qcrb_core::catalog::phase_diffusion_ncrb_oracle(1.0, 0.4);
    assert!((s.primal_objective - want).abs() < 1e-6, "{} vs {want}", s.primal_objective);
    assert!(bound_program(BoundKind::Sld, &m, &w).is_err());
}

#[test]
fn weighted_nagaoka_program_is_the_reparameterized_one() {
    let m = qcrb_core::catalog::phase_diffusion(1.0, 0.0, 0.4).unwrap();
    let w = WeightMatrix::diag(&[1.0, 2.0]).unwrap();
    let p = bound_program(BoundKind::Nagaoka, &m, &w).unwrap();
    let s = solve(&p, &SolverSettings::default()).unwrap();
    let direct = qcrb_core::bounds::ncrb(&m, &w, &SolverSettings::default()).unwrap();
    assert!((s.primal_objective - direct.value).abs() < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn model_json_round_trip_is_bit_exact(seed in 0u64..1000, d in 1usize..5, n in 1usize..3) {
        let spec = RandomModelSpec { dim: d + 1, rank: d + 1, n_params: n, trials: 1, seed };
        let m = random_model_trial(&spec, 0).unwrap();
        let text = model_to_string(&m);
        let back = parse_model(&text).unwrap();
        prop_assert!(same_bits(m.state(), back.state()));
        for (a, b) in m.derivs().iter().zip(back.derivs()) {
            prop_assert!(same_bits(a, b));
        }
        prop_assert_eq!(back.label(), m.label());
        let f: ModelFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(f.d, d + 1);
        prop_assert_eq!(f.n, n);
    }

    #[test]
    fn fmt12_keeps_twelve_digits(x in prop::num::f64::NORMAL) {
        let s = fmt12(x);
        let y: f64 = s.parse().unwrap();
        prop_assert!((y - x).abs() <= 5e-12 * x.abs(), "{} -> {}", x, s);
        let digits = s.trim_start_matches('-').split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 12, "{}", s);
    }
}
