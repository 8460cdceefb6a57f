//! The acceptance suite: one check per numbered criterion, each with its
//! tolerance pinned here.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use qcrb_core::bounds::{
    a_matrix, equality_condition, hcrb, holevo_function, min_trace_dominating, nagaoka_function, ncrb, nhcrb, sld_bound,
    BoundResult,
};
use qcrb_core::catalog::{self, phase_diffusion, phase_diffusion_holevo_optimizer_half_pi, phase_diffusion_reparam_tilde};
use qcrb_core::gap::{
    bm_lower_bound, bm_margin, bm_parts, gap_report, mcopy_estimators, random_gap_row, random_model_trial, sz_ncrb_upper,
    trabs_sz_sum, GapPair, RandomModelSpec,
};
use qcrb_core::linalg::{embed_at, pauli, sqrt_psd, tensor_power, trabs, CMat, Hermitian, I, ONE, RANK_TOL, SIZE_CAP};
use qcrb_core::model::{tensor_power_model, StatisticalModel, WeightMatrix};
use qcrb_core::sdp::{solve, ConicProgram, Field, SolverSettings, Status};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    /// Skips two-copy programs above dimension 3.
    Fast,
    Full,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub level: Level,
    /// Criterion ids to run; empty runs all.
    pub only: Vec<usize>,
    /// Added to every closed-form target, to check that the suite can fail.
    pub perturb: f64,
    pub settings: SolverSettings,
}

impl Default for Options {
    fn default() -> Self {
        Options { level: Level::Full, only: Vec::new(), perturb: 0.0, settings: SolverSettings::default() }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<34} {} [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Result<Check> {
    Ok(Check { passed, detail })
}

struct Ctx<'a> {
    opts: &'a Options,
}

impl Ctx<'_> {
    fn s(&self) -> &SolverSettings {
        &self.opts.settings
    }

    fn target(&self, v: f64) -> f64 {
        v + self.opts.perturb
    }
}

type CheckFn = fn(&Ctx) -> Result<Check>;

pub const TITLES: [&str; 14] = [
    "phase-diffusion analytic agreement",
    "qubit s_z Holevo bound",
    "Bell phase-damping closed forms",
    "bound ordering chain",
    "Holevo additivity, Nagaoka subadd.",
    "pure-state equality",
    "equality-condition equivalence",
    "gap persistence at two copies",
    "B_M positivity",
    "asymptotic trace-norm sums",
    "random-model relative gap",
    "optimizer uniqueness on quotient",
    "small-diffusion discontinuity",
    "solver unit suite",
];

const CHECKS: [CheckFn; 14] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14];

/// Run the selected criteria in order, calling `report` after each.
pub fn run(opts: &Options, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let cx = Ctx { opts };
    let mut out = Vec::new();
    for (k, f) in CHECKS.iter().enumerate() {
        let id = k + 1;
        if !opts.only.is_empty() && !opts.only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let (passed, detail) = match f(&cx) {
            Ok(c) => (c.passed, c.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        let o = Outcome { id, title: TITLES[k], passed, detail, seconds: t0.elapsed().as_secs_f64() };
        report(&o);
        out.push(o);
    }
    out
}

fn ident(n: usize) -> WeightMatrix {
    WeightMatrix::identity(n)
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn optimal(r: BoundResult) -> Result<f64> {
    if r.diagnostics.status != Status::Optimal {
        bail!("{} solve ended {}", r.kind.as_str(), r.diagnostics.status.as_str());
    }
    Ok(r.value)
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn c1(cx: &Ctx) -> Result<Check> {
    let pts: Vec<(f64, f64)> =
        linspace(0.2, PI - 0.2, 10).into_iter().flat_map(|l| linspace(0.05, 1.0, 10).into_iter().map(move |d| (l, d))).collect();
    let errs = pts
        .par_iter()
        .map(|&(l, d)| {
            let m = phase_diffusion(l, 0.0, d)?;
            let h = optimal(hcrb(&m, &ident(2), cx.s())?)?;
            let n = optimal(ncrb(&m, &ident(2), cx.s())?)?;
            let oh = cx.target(catalog::phase_diffusion_hcrb_oracle(l, d));
            let on = cx.target(catalog::phase_diffusion_ncrb_oracle(l, d));
            Ok(((h - oh).abs(), (n - on).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let eh = max_of(errs.iter().map(|e| e.0));
    let en = max_of(errs.iter().map(|e| e.1));
    check(eh <= 1e-5 && en <= 1e-5, format!("100 points: max |dhcrb| = {eh:.1e}, max |dncrb| = {en:.1e} (tol 1e-5)"))
}

fn c2(cx: &Ctx) -> Result<Check> {
    let mut worst = 0.0f64;
    for s in [0.2, -0.2, 0.5, -0.5, 0.9, -0.9] {
        let h = optimal(hcrb(&catalog::qubit_sz(s)?, &ident(2), cx.s())?)?;
        worst = worst.max((h - cx.target(2.0 + 2.0 * f64::abs(s))).abs());
    }
    check(worst <= 1e-6, format!("max |hcrb - (2 + 2|s_z|)| = {worst:.1e} (tol 1e-6)"))
}

fn c3(cx: &Ctx) -> Result<Check> {
    let (mut eh, mut enh, mut es) = (0.0f64, 0.0f64, 0.0f64);
    for eps in [0.1, 0.3, 0.5, 0.7] {
        let m = catalog::bell_phase_damping(eps)?;
        let h = optimal(hcrb(&m, &ident(3), cx.s())?)?;
        let nh = optimal(nhcrb(&m, &ident(3), cx.s())?)?;
        let s = sld_bound(&m, &ident(3))?.value;
        eh = eh.max((h - cx.target(catalog::bell_hcrb_oracle(eps))).abs());
        enh = enh.max((nh - cx.target(catalog::bell_nhcrb_oracle(eps))).abs());
        es = es.max((h - s).abs());
    }
    check(
        eh <= 1e-5 && enh <= 1e-5 && es <= 1e-7,
        format!("max |dhcrb| = {eh:.1e}, max |dnhcrb| = {enh:.1e} (tol 1e-5); max |hcrb - sldcrb| = {es:.1e} (tol 1e-7)"),
    )
}

/// Largest violation of sld ≤ hcrb ≤ nhcrb (and hcrb ≤ ncrb for n = 2).
fn chain_violation(m: &StatisticalModel, s: &SolverSettings) -> Result<f64> {
    let w = ident(m.n_params());
    let sl = sld_bound(m, &w)?.value;
    let h = optimal(hcrb(m, &w, s)?)?;
    let nh = optimal(nhcrb(m, &w, s)?)?;
    let mut v = (sl - h).max(h - nh);
    if m.n_params() == 2 {
        v = v.max(h - optimal(ncrb(m, &w, s)?)?);
    }
    Ok(v)
}

fn c4(cx: &Ctx) -> Result<Check> {
    let mut worst = f64::NEG_INFINITY;
    for e in catalog::entries() {
        let v: Vec<f64> = e.params.iter().map(|p| p.default).collect();
        let m = e.build(&v)?;
        worst = worst.max(chain_violation(&m, cx.s()).map_err(|err| anyhow!("{}: {err}", e.name))?);
    }
    let specs: Vec<(RandomModelSpec, usize)> = (0..200)
        .map(|t| {
            let d = 2 + t % 3;
            let n = 2 + (t / 3) % 2;
            let mut r = 1 + (t / 6) % d;
            while n > r * r + 2 * r * (d - r) - 1 {
                r += 1;
            }
            (RandomModelSpec { dim: d, rank: r, n_params: n, trials: 200, seed: 4004 }, t)
        })
        .collect();
    let v = specs
        .par_iter()
        .map(|(spec, t)| chain_violation(&random_model_trial(spec, *t)?, cx.s()))
        .collect::<Result<Vec<_>>>()?;
    let worst_random = v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let worst = worst.max(worst_random);
    check(
        worst <= 1e-7,
        format!("{} catalog + 200 random models: largest violation {worst:.1e} (slack 1e-7)", catalog::entries().len()),
    )
}

fn c5(cx: &Ctx) -> Result<Check> {
    let spec = RandomModelSpec { dim: 2, rank: 2, n_params: 2, trials: 20, seed: 5005 };
    let rows = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let m = random_model_trial(&spec, t)?;
            let m2 = tensor_power_model(&m, 2)?;
            let h1 = optimal(hcrb(&m, &ident(2), cx.s())?)?;
            let h2 = optimal(hcrb(&m2, &ident(2), cx.s())?)?;
            let n1 = optimal(ncrb(&m, &ident(2), cx.s())?)?;
            let n2 = optimal(ncrb(&m2, &ident(2), cx.s())?)?;
            Ok(((2.0 * h2 - h1).abs() / h1, 2.0 * n2 - n1))
        })
        .collect::<Result<Vec<_>>>()?;
    let add = max_of(rows.iter().map(|r| r.0));
    let sub = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    check(
        add <= 1e-5 && sub <= 1e-6,
        format!("20 qubit models: max |2 C_H(2) - C_H|/C_H = {add:.1e} (tol 1e-5); max 2 C_N(2) - C_N = {sub:.1e} (slack 1e-6)"),
    )
}

fn c6(cx: &Ctx) -> Result<Check> {
    let diffs = (0..20usize)
        .into_par_iter()
        .map(|t| {
            let spec = RandomModelSpec { dim: 2 + t % 2, rank: 1, n_params: 2, trials: 20, seed: 6006 };
            let m = random_model_trial(&spec, t)?;
            let h = optimal(hcrb(&m, &ident(2), cx.s())?)?;
            let n = optimal(ncrb(&m, &ident(2), cx.s())?)?;
            Ok((n - h).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = max_of(diffs);
    check(worst <= 1e-6, format!("20 pure qubit/qutrit models: max |ncrb - hcrb| = {worst:.1e} (tol 1e-6)"))
}

/// Generic Hermitian pair drawn as the derivatives of an unrelated
/// full-rank model.
fn generic_pair(d: usize, t: usize) -> Result<Vec<Hermitian>> {
    let spec = RandomModelSpec { dim: d, rank: d, n_params: 2, trials: 200, seed: 7707 };
    Ok(random_model_trial(&spec, t)?.derivs().to_vec())
}

fn c7(_cx: &Ctx) -> Result<Check> {
    let cases = (0..200usize)
        .into_par_iter()
        .map(|t| {
            let d = 2 + (t / 4) % 2;
            let (m, x) = match t % 4 {
                0 => {
                    let spec = RandomModelSpec { dim: d, rank: 1, n_params: 2, trials: 200, seed: 7001 };
                    (random_model_trial(&spec, t)?, generic_pair(d, t)?)
                }
                1 => {
                    let w = [1.0 + (t % 3) as f64, 2.0 + (t % 5) as f64, 3.0 + (t % 7) as f64];
                    let sum: f64 = w.iter().sum();
                    let p: Vec<f64> = w.iter().map(|v| v / sum).collect();
                    let m = catalog::classical_diagonal(&p, &[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]])?;
                    let a = (t % 11) as f64 * 0.1;
                    (m, vec![Hermitian::diag(&[1.0, -a, 0.5]), Hermitian::diag(&[a, 2.0, -1.0])])
                }
                2 => {
                    let spec = RandomModelSpec { dim: d, rank: d, n_params: 2, trials: 200, seed: 7002 };
                    (random_model_trial(&spec, t)?, generic_pair(d, t)?)
                }
                _ => {
                    let spec = RandomModelSpec { dim: 3, rank: 2, n_params: 2, trials: 200, seed: 7003 };
                    (random_model_trial(&spec, t)?, generic_pair(3, t)?)
                }
            };
            let fnag = nagaoka_function(&m, &x)?;
            let fh = holevo_function(&m, &x, &ident(2))?;
            let (_, tp, tq) = equality_condition(&m, &x)?;
            Ok(((fnag - fh).abs() <= 1e-8, tp.min(tq) <= 1e-8))
        })
        .collect::<Result<Vec<_>>>()?;
    let equal = cases.iter().filter(|c| c.1).count();
    let disagree = cases.iter().filter(|c| c.0 != c.1).count();
    check(disagree == 0, format!("200 pairs ({equal} satisfy the condition): {disagree} disagreements"))
}

fn c8(cx: &Ctx) -> Result<Check> {
    let s = cx.s();
    let gap = |m: &StatisticalModel, pair: GapPair, copies: &[usize], n: usize| -> Result<Vec<f64>> {
        let rep = gap_report(m, pair, copies, &ident(n), s);
        rep.entries
            .iter()
            .map(|e| match e {
                Ok(g) if g.status == (Status::Optimal, Status::Optimal) => Ok(g.gap),
                Ok(g) => Err(anyhow!("{} at M = {}: statuses {:?}", pair.as_str(), g.copies, g.status)),
                Err((c, msg)) => Err(anyhow!("{} at M = {c}: {msg}", pair.as_str())),
            })
            .collect()
    };
    let pd = gap(&phase_diffusion(0.3, 0.0, 0.3)?, GapPair::NagaokaHolevo, &[1, 2], 2)?;
    let cl_model = catalog::entry("classical_diagonal").expect("catalog entry").build(&[0.5, 0.3])?;
    let mut cl = gap(&cl_model, GapPair::NagaokaHolevo, &[1, 2], 2)?;
    cl.extend(gap(&cl_model, GapPair::NagaokaHayashiSld, &[1, 2], 2)?);
    let full = cx.opts.level == Level::Full;
    let bell_copies: &[usize] = if full { &[1, 2] } else { &[1] };
    let bell = gap(&catalog::bell_phase_damping(0.5)?, GapPair::NagaokaHayashiSld, bell_copies, 3)?;
    let cl_max = max_of(cl.iter().map(|g| g.abs()));
    let mut ok = pd[0] > 1e-3 && pd[1] > 1e-6 && cl_max <= 1e-7 && bell[0] > 0.1;
    let bell2 = if full {
        ok &= bell[1] > 1e-6;
        format!("{:.3e}", bell[1])
    } else {
        "skipped (fast level)".into()
    };
    check(
        ok,
        format!(
            "phase diffusion N-H: {:.3e}, {:.3e}; classical max |gap| {cl_max:.1e}; Bell NH-S: {:.4}, {bell2}",
            pd[0], pd[1], bell[0]
        ),
    )
}

fn c9(cx: &Ctx) -> Result<Check> {
    let delta = 1.0;
    let m = phase_diffusion(FRAC_PI_2, 0.0, delta)?;
    let x = phase_diffusion_holevo_optimizer_half_pi(delta).to_vec();
    let fh = holevo_function(&m, &x, &ident(2))?;
    let oracle = catalog::phase_diffusion_hcrb_oracle(FRAC_PI_2, delta);
    let tr_a = a_matrix(&m, &x)?.tr();
    let mut min_ln = f64::INFINITY;
    let mut positive = true;
    for copies in 1..=100usize {
        let parts = bm_parts(&m, &x, copies)?;
        positive &= bm_margin(&parts, 0.0, copies) > 0.0;
        min_ln = min_ln.min(parts.ln_second);
    }
    // B_M against the directly evaluated M-copy Nagaoka function.
    let mut cases: Vec<(StatisticalModel, Vec<Hermitian>)> = vec![(m.clone(), x.clone())];
    let spec = RandomModelSpec { dim: 2, rank: 2, n_params: 2, trials: 4, seed: 9009 };
    for t in 0..spec.trials {
        let rm = random_model_trial(&spec, t)?;
        let opt = hcrb(&rm, &ident(2), cx.s())?;
        cases.push((rm, opt.optimizer));
    }
    let mut excess = f64::NEG_INFINITY;
    for (mm, xx) in &cases {
        for copies in 1..=4usize {
            let direct = nagaoka_function(&tensor_power_model(mm, copies)?, &mcopy_estimators(xx, copies)?)?;
            excess = excess.max(bm_lower_bound(mm, xx, copies)? - direct);
        }
    }
    let consistent = (fh - oracle).abs() <= 1e-9 && tr_a.abs() <= 1e-12;
    check(
        positive && consistent && excess <= 1e-9,
        format!(
            "margin > 0 for M = 1..100 (smallest ln margin {min_ln:.1}); |tr A| = {:.1e}; max B_M - F_N(X_M) over M <= 4 = {excess:.1e} (slack 1e-9)",
            tr_a.abs()
        ),
    )
}

fn brute_trabs_sz(s_z: f64, copies: usize) -> Result<f64> {
    let [_, _, z] = pauli();
    let s = Hermitian::identity(2).add(&z.scale(s_z)).scale(0.5);
    let sm = tensor_power(s.as_mat(), copies, SIZE_CAP)?;
    let mut sum = embed_at(&z, 1, copies, SIZE_CAP)?;
    for k in 2..=copies {
        sum = sum.add(&embed_at(&z, k, copies, SIZE_CAP)?);
    }
    let op = Hermitian::symmetrize(sm.matmul(sum.as_mat()));
    Ok(trabs(&op)?)
}

fn c10(_cx: &Ctx) -> Result<Check> {
    let mut brute = 0.0f64;
    for s in [0.0, 0.3, -0.3, 0.6, 0.9, -0.9] {
        for copies in 1..=10usize {
            brute = brute.max((trabs_sz_sum(s, copies)? - brute_trabs_sz(s, copies)?).abs());
        }
    }
    let mut lim = 0.0f64;
    for s in [0.3, 0.6, 0.9] {
        lim = lim.max((trabs_sz_sum(s, 50)? / 50.0 - s).abs());
    }
    let mut monotone = true;
    let mut last = Vec::new();
    for s in [0.3, 0.5, 0.6, 0.9] {
        let h = 2.0 + 2.0 * f64::abs(s);
        let v: Vec<f64> = [2usize, 4, 10, 60].iter().map(|&m| Ok(m as f64 * sz_ncrb_upper(s, m)?)).collect::<Result<_>>()?;
        monotone &= v.windows(2).all(|w| w[1] < w[0]) && v.iter().all(|&x| x >= h);
        last.push(v[3] - h);
    }
    check(
        brute <= 1e-12 && lim <= 0.05 && monotone,
        format!(
            "brute force max err {brute:.1e} (tol 1e-12); max |sum/50 - |s_z|| = {lim:.3} (tol 0.05); M*upper decreasing, excess at M = 60: {}",
            last.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c11(cx: &Ctx) -> Result<Check> {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in 2..=4usize {
        let spec = RandomModelSpec { dim: d, rank: d, n_params: 2, trials: 500, seed: 11_000 + d as u64 };
        let rows = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let r = random_gap_row(&spec, t, cx.s())?;
                if r.status != Status::Optimal {
                    bail!("d = {d} trial {t}: status {}", r.status.as_str());
                }
                Ok(r.rel_gap)
            })
            .collect::<Result<Vec<_>>>()?;
        let lo = rows.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ok &= lo > 0.0 && hi <= 1.0;
        parts.push(format!("d={d}: [{lo:.2e}, {hi:.4}]"));
    }
    check(ok, format!("500 trials per d, rel_gap range {}", parts.join("; ")))
}

fn sandwich_distance(m: &StatisticalModel, a: &[Hermitian], b: &[Hermitian]) -> Result<f64> {
    let r = sqrt_psd(m.state(), RANK_TOL)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.sub(y);
            r.as_mat().matmul(d.as_mat()).frobenius().max(d.as_mat().matmul(r.as_mat()).frobenius())
        })
        .fold(0.0, f64::max))
}

fn c12(cx: &Ctx) -> Result<Check> {
    let shapes = [(3usize, 1usize), (3, 2), (4, 1), (4, 2), (4, 3)];
    let rows = (0..20usize)
        .into_par_iter()
        .map(|t| {
            let (d, r) = shapes[t % shapes.len()];
            let spec = RandomModelSpec { dim: d, rank: r, n_params: 2, trials: 20, seed: 12_012 };
            let m = random_model_trial(&spec, t)?;
            let a = hcrb(&m, &ident(2), cx.s())?;
            let perturbed = SolverSettings { init_perturbation: 0.7, ..cx.s().clone() };
            let b = hcrb(&m, &ident(2), &perturbed)?;
            let dv = (optimal(a.clone())? - optimal(b.clone())?).abs();
            Ok((dv, sandwich_distance(&m, &a.optimizer, &b.optimizer)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let dv = max_of(rows.iter().map(|r| r.0));
    let dx = max_of(rows.iter().map(|r| r.1));
    check(
        dv <= 1e-7 && dx <= 1e-5,
        format!("20 rank-deficient models: max value diff {dv:.1e} (tol 1e-7), max optimizer distance {dx:.1e} (tol 1e-5)"),
    )
}

fn c13(cx: &Ctx) -> Result<Check> {
    let want = cx.target(1.0 + 2.0 * SQRT_2 / 3.0);
    let m = phase_diffusion(FRAC_PI_2, 0.0, 1e-3)?;
    let ratio = optimal(ncrb(&m, &ident(2), cx.s())?)? / optimal(hcrb(&m, &ident(2), cx.s())?)?;
    let ratio_err = (ratio - want).abs();
    // The pure δ̃ = 0 model is rejected (its derivative leaves the state
    // space), so the value there is taken as the one-sided limit: C_H is
    // linear in δ̃ and C_N − C_H ∝ √δ̃, removed by one Richardson step.
    let rejected = phase_diffusion_reparam_tilde(FRAC_PI_2, 0.0, 0.0).is_err();
    let mut lim_err = 0.0f64;
    for lambda in [FRAC_PI_2, 1.2] {
        let at = |t: f64| -> Result<(f64, f64)> {
            let mt = phase_diffusion_reparam_tilde(lambda, 0.0, t)?;
            Ok((optimal(hcrb(&mt, &ident(2), cx.s())?)?, optimal(ncrb(&mt, &ident(2), cx.s())?)?))
        };
        let (h1, n1) = at(1e-8)?;
        let (h4, n4) = at(4e-8)?;
        let target = cx.target(1.0 / lambda.sin().powi(2));
        let h0 = (4.0 * h1 - h4) / 3.0;
        let n0 = 2.0 * n1 - n4;
        lim_err = lim_err.max((h0 - target).abs()).max((n0 - target).abs());
    }
    check(
        ratio_err <= 1e-3 && lim_err <= 1e-5,
        format!(
            "ratio at delta = 1e-3: {ratio:.5} (err {ratio_err:.1e}, tol 1e-3); delta~ -> 0+ limit err {lim_err:.1e} (tol 1e-5){}",
            if rejected { "; delta~ = 0 itself is rejected as inconsistent" } else { "" }
        ),
    )
}

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Free Hermitian k×k variable at diagonal offset `r0`; returns the
/// indices of its diagonal coordinates.
fn hermitian_var(p: &mut ConicProgram, block: usize, v0: usize, r0: usize, k: usize) -> Vec<usize> {
    let mut v = v0;
    let mut diag = Vec::new();
    for i in 0..k {
        for j in i..k {
            if i == j {
                p.add_coeff(block, v, r0 + i, r0 + i, ONE);
                diag.push(v);
                v += 1;
            } else {
                p.add_coeff(block, v, r0 + i, r0 + j, ONE * R2);
                p.add_coeff(block, v + 1, r0 + i, r0 + j, I * R2);
                v += 2;
            }
        }
    }
    diag
}

/// ‖A‖₁ = min ½(tr U + tr V) subject to [[U, A], [Aᴴ, V]] ⪰ 0.
fn trace_norm_value(a: &Hermitian, s: &SolverSettings) -> Result<f64> {
    let k = a.dim();
    let mut p = ConicProgram::new(2 * k * k);
    let b = p.add_block(2 * k, Field::Complex);
    let du = hermitian_var(&mut p, b, 0, 0, k);
    let dv = hermitian_var(&mut p, b, k * k, k, k);
    for &d in du.iter().chain(&dv) {
        p.c[d] = 0.5;
    }
    for i in 0..k {
        for j in 0..k {
            p.add_constant(b, i, k + j, a.as_mat()[(i, j)]);
        }
    }
    let sol = solve(&p, s)?;
    if sol.status != Status::Optimal {
        bail!("trace-norm program ended {}", sol.status.as_str());
    }
    Ok(sol.primal_objective)
}

fn c14(cx: &Ctx) -> Result<Check> {
    let tn = (0..100usize)
        .into_par_iter()
        .map(|t| {
            let k = 2 + t % 15;
            let spec = RandomModelSpec { dim: k, rank: k, n_params: 1, trials: 100, seed: 14_001 };
            let h = random_model_trial(&spec, t)?.derivs()[0].clone();
            let a = h.add(&Hermitian::identity(k).scale((t % 7) as f64 * 0.3 - 0.9));
            let want = trabs(&a)?;
            Ok((trace_norm_value(&a, cx.s())? - want).abs() / want.max(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let gram = (0..100usize)
        .into_par_iter()
        .map(|t| {
            let n = 1 + t % 5;
            let r = 1 + (t / 5) % n;
            let spec = RandomModelSpec { dim: n.max(2), rank: r.min(n.max(2)), n_params: 1, trials: 100, seed: 14_002 };
            let s = random_model_trial(&spec, t)?.state().clone();
            // Keep the leading n×n block so n = 1 is covered too.
            let g = Hermitian::symmetrize(CMat::from_fn(n, n, |i, j| s.as_mat()[(i, j)] * (1.0 + (t % 4) as f64)));
            let im = Hermitian::symmetrize(CMat::from_fn(n, n, |i, j| I * g.as_mat()[(i, j)].im));
            let want = g.tr() + trabs(&im)?;
            let got = min_trace_dominating(&g, &ident(n), cx.s())?;
            Ok((got - want).abs() / want.max(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let e1 = max_of(tn);
    let e2 = max_of(gram);
    check(
        e1 <= 1e-8 && e2 <= 1e-8,
        format!("trace-norm epigraph max rel err {e1:.1e}; min-trace Gram max rel err {e2:.1e} (tol 1e-8, relative to max(1, value))"),
    )
}
