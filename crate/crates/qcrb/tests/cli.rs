use std::process::{Command, Output};

use qcrb_core::catalog::{bell_hcrb_oracle, phase_diffusion_hcrb_oracle, phase_diffusion_ncrb_oracle};
use serde_json::Value;

fn qcrb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

#[test]
fn compute_phase_diffusion_json() {
    let o = qcrb(&["compute", "--model", "phase_diffusion", "--param", "lambda=1.5708", "--param", "delta=0.5", "--bounds", "hcrb,ncrb,sld"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    let keys: Vec<&str> = arr[0].as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(sorted, ["bound", "copies", "gap", "optimizer", "status", "value"]);
    let val = |i: usize| arr[i]["value"].as_f64().unwrap();
    assert_eq!(arr[0]["bound"], "hcrb");
    assert!((val(0) - phase_diffusion_hcrb_oracle(1.5708, 0.5)).abs() < 1e-5);
    assert!((val(0) - 2.297443).abs() < 1e-5);
    assert!((val(1) - 4.36583).abs() < 1e-5);
    assert!((val(1) - phase_diffusion_ncrb_oracle(1.5708, 0.5)).abs() < 1e-5);
    assert_eq!(arr[2]["bound"], "sld");
    assert!(val(2) <= val(0) + 1e-7);
    for r in arr {
        assert_eq!(r["status"], "optimal");
        assert_eq!(r["copies"], 1);
        let opt = r["optimizer"].as_array().unwrap();
        assert_eq!(opt.len(), 2);
        // Matrices are 2×2 arrays of [re, im] pairs.
        assert_eq!(opt[0].as_array().unwrap().len(), 2);
        assert_eq!(opt[0][0][0].as_array().unwrap().len(), 2);
    }
}

#[test]
fn compute_from_model_file_with_copies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    let o = qcrb(&["export-model", "--model", "qubit_sz", "--param", "s_z=0.4", "--out", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let one = qcrb(&["compute", "--model-file", p, "--bounds", "nhcrb"]);
    let two = qcrb(&["compute", "--model-file", p, "--bounds", "nhcrb", "--copies", "2"]);
    assert_eq!(two.status.code(), Some(0), "{}", stderr(&two));
    let v1: Value = serde_json::from_str(&stdout(&one)).unwrap();
    let v2: Value = serde_json::from_str(&stdout(&two)).unwrap();
    assert_eq!(v2[0]["copies"], 2);
    let (a, b) = (v1[0]["value"].as_f64().unwrap(), v2[0]["value"].as_f64().unwrap());
    // Measuring each copy separately is available to the two-copy bound.
    assert!(2.0 * b <= a + 1e-6, "{b} vs {a}");
}

#[test]
fn nagaoka_on_three_parameters_is_a_usage_error() {
    let o = qcrb(&["compute", "--model", "bell_phase_damping", "--bounds", "ncrb"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("requires 2 parameters"), "{}", stderr(&o));
}

#[test]
fn bad_inputs_exit_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let cases = [
        (write("syntax.json", "{\"d\": 2,\n \"n\": }"), "line 2"),
        (write("rows.json", r#"{"d":2,"n":1,"S":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]],"derivs":[[[[0.5,0],[0,0]],[[0,0]]]],"label":"x"}"#), "derivs[0]: row 1"),
        (write("extra.json", r#"{"d":1,"n":0,"S":[[[1,0]]],"derivs":[],"label":"x","copies":2}"#), "unknown field"),
        (write("count.json", r#"{"d":1,"n":1,"S":[[[1,0]]],"derivs":[],"label":"x"}"#), "derivs: 0 matrices"),
    ];
    for (p, needle) in &cases {
        let o = qcrb(&["compute", "--model-file", p, "--bounds", "sld"]);
        assert_eq!(o.status.code(), Some(1), "{p}");
        assert!(stderr(&o).contains(needle), "{p}: {}", stderr(&o));
    }
    let missing = qcrb(&["compute", "--model-file", "/nonexistent/m.json"]);
    assert_eq!(missing.status.code(), Some(1));
    for args in [
        vec!["compute", "--model", "nope"],
        vec!["compute", "--model", "qubit_sz", "--param", "bogus=1"],
        vec!["compute", "--model", "qubit_sz", "--copies", "9"],
        vec!["compute", "--model", "qubit_sz", "--weight", "1,2,3"],
        vec!["compute", "--model", "qubit_sz", "--bounds", "xyz"],
        vec!["compute"],
        vec!["verify", "--only", "15"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qcrb(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn weight_and_format_options() {
    let o = qcrb(&["compute", "--model", "qubit_sz", "--bounds", "sld,hcrb", "--weight", "1,3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h, ["bound", "value", "copies", "gap", "status"]);
    // σ_x/2, σ_y/2 derivatives at s_z = 0.5: J = I, so tr(W J⁻¹) = 4.
    assert_eq!(rows[0][1], "4");
    let full = qcrb(&["compute", "--model", "qubit_sz", "--bounds", "sld", "--weight", "1,0,0,3", "--format", "csv"]);
    assert_eq!(csv_rows(&stdout(&full)).1[0][1], "4");
}

#[test]
fn dump_program_schema() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("prog.json");
    let o = qcrb(&["compute", "--model", "qubit_sz", "--bounds", "sld,hcrb,nhcrb", "--dump-program", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let obj = v.as_object().unwrap();
    assert!(obj.contains_key("hcrb") && obj.contains_key("nhcrb") && !obj.contains_key("sld"));
    let h = &v["hcrb"];
    let n = h["n_vars"].as_u64().unwrap() as usize;
    assert_eq!(h["c"].as_array().unwrap().len(), n);
    let rows = h["b"].as_array().unwrap().len();
    for t in h["A"].as_array().unwrap() {
        assert!((t[0].as_u64().unwrap() as usize) < rows);
        assert!((t[1].as_u64().unwrap() as usize) < n);
    }
    for b in h["blocks"].as_array().unwrap() {
        let d = b["dim"].as_u64().unwrap() as usize;
        let len = if b["field"] == "complex" { d * d } else { d * (d + 1) / 2 };
        assert_eq!(b["constant"].as_array().unwrap().len(), len);
        for t in b["coeffs"].as_array().unwrap() {
            assert!((t[0].as_u64().unwrap() as usize) < n);
            assert!((t[1].as_u64().unwrap() as usize) < len);
        }
    }
}

#[test]
fn sweep_phase_diffusion_gap_positive() {
    let o = qcrb(&["sweep", "--model", "phase_diffusion", "--param", "delta=0.5", "--grid", "lambda=0.3:2.8:6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h, ["lambda", "hcrb", "ncrb", "gap_N-H", "status"]);
    assert_eq!(rows.len(), 6);
    let mut last = f64::NEG_INFINITY;
    for r in &rows {
        let lambda: f64 = r[0].parse().unwrap();
        assert!(lambda > last);
        last = lambda;
        let gap: f64 = r[3].parse().unwrap();
        assert!(gap > 0.0);
        assert_eq!(r[4], "optimal");
    }
}

#[test]
fn sweep_bell_matches_closed_form_and_is_deterministic() {
    let args = ["sweep", "--model", "bell_phase_damping", "--grid", "epsilon=0:0.9:10", "--bounds", "sld,hcrb", "--jobs", "2"];
    let o = qcrb(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let eps: f64 = r[0].parse().unwrap();
        let h: f64 = r[2].parse().unwrap();
        assert!((h - bell_hcrb_oracle(eps)).abs() < 1e-5, "eps {eps}: {h}");
    }
    let again = qcrb(&["sweep", "--model", "bell_phase_damping", "--grid", "epsilon=0:0.9:10", "--bounds", "sld,hcrb", "--jobs", "1"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn sweep_edge_cases() {
    let o = qcrb(&["sweep", "--model", "phase_diffusion", "--grid", "lambda=0.2:3:0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "lambda,hcrb,ncrb,gap_N-H,status\n");
    // Two axes, row-major over the first.
    let o = qcrb(&["sweep", "--model", "phase_diffusion", "--grid", "lambda=1:2:2", "--grid", "delta=0.2:0.4:3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 6);
    assert_eq!(arr[1]["lambda"], 1.0);
    assert!((arr[1]["delta"].as_f64().unwrap() - 0.3).abs() < 1e-15);
    // A grid point outside the domain is recorded, not fatal.
    let o = qcrb(&["sweep", "--model", "qubit_sz", "--grid", "s_z=-0.5:0.5:3", "--bounds", "hcrb"]);
    assert_eq!(o.status.code(), Some(2));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert!(rows[1][2].contains("model"));
    assert_eq!(rows[0][2], "optimal");
    for bad in [
        vec!["sweep", "--model", "qubit_sz", "--grid", "x=0:1:2"],
        vec!["sweep", "--model", "phase_diffusion", "--grid", "lambda=0:1"],
        vec!["sweep", "--model", "phase_diffusion", "--grid", "lambda=1:2:2", "--param", "lambda=1"],
        vec!["sweep", "--model", "phase_diffusion", "--grid", "lambda=1:2:2", "--grid", "delta=1:2:2", "--grid", "phi=0:1:2"],
    ] {
        assert_eq!(qcrb(&bad).status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn random_gap_study() {
    let args = ["random", "--dim", "2", "--trials", "12", "--seed", "77"];
    let o = qcrb(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h, ["trial", "d", "ncrb", "hcrb", "rel_gap"]);
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let g: f64 = r[4].parse().unwrap();
        assert!(g > 0.0 && g <= 1.0, "{g}");
    }
    let again = qcrb(&args);
    assert_eq!(o.stdout, again.stdout);
    let other = qcrb(&["random", "--dim", "2", "--trials", "12", "--seed", "78"]);
    assert_ne!(o.stdout, other.stdout);
}

#[test]
fn random_rank_deficient_and_persistence() {
    let o = qcrb(&["random", "--dim", "3", "--rank", "2", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).1.len(), 5);
    let o = qcrb(&["random", "--study", "persistence", "--dim", "2", "--trials", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(h, ["trial", "d", "r", "n", "gap1_half", "gap2", "status1", "status2"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[6] == "optimal" && r[7] == "optimal"));
    assert_eq!(qcrb(&["random", "--dim", "2", "--rank", "3"]).status.code(), Some(1));
    assert_eq!(qcrb(&["random", "--dim", "2", "--n-params", "3"]).status.code(), Some(1));
}

#[test]
fn verify_passes_and_detects_perturbation() {
    let o = qcrb(&["verify", "--only", "2,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS  2") && text.contains("PASS 10"), "{text}");
    let bad = qcrb(&["verify", "--only", "2", "--perturb", "1e-3"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL  2 qubit s_z Holevo bound"), "{}", stdout(&bad));
    let js = qcrb(&["verify", "--only", "7", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&js)).unwrap();
    assert_eq!(v[0]["id"], 7);
    assert_eq!(v[0]["passed"], true);
}

#[test]
fn export_list_and_bit_exact_round_trip() {
    let o = qcrb(&["export-model", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["phase_diffusion", "qubit_sz", "bell_phase_damping", "classical_diagonal"] {
        assert!(stdout(&o).contains(name));
    }
    let js: Value = serde_json::from_str(&stdout(&qcrb(&["export-model", "--list", "--format", "json"]))).unwrap();
    assert_eq!(js.as_array().unwrap().len(), 5);

    let e = qcrb(&["export-model", "--model", "phase_diffusion", "--param", "lambda=0.7", "--param", "delta=0.37"]);
    let m = qcrb::format::parse_model(&stdout(&e)).unwrap();
    let direct = qcrb_core::catalog::phase_diffusion(0.7, 0.0, 0.37).unwrap();
    let bits = |h: &qcrb_core::linalg::Hermitian| -> Vec<u64> {
        let a = h.as_mat();
        (0..a.rows()).flat_map(|i| (0..a.cols()).flat_map(move |j| [(a[(i, j)].re + 0.0).to_bits(), (a[(i, j)].im + 0.0).to_bits()])).collect()
    };
    assert_eq!(bits(m.state()), bits(direct.state()));
    for (a, b) in m.derivs().iter().zip(direct.derivs()) {
        assert_eq!(bits(a), bits(b));
    }
    let two = qcrb(&["export-model", "--model", "qubit_sz", "--copies", "2"]);
    let v: Value = serde_json::from_str(&stdout(&two)).unwrap();
    assert_eq!(v["d"], 4);
}
