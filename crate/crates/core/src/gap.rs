//! Multi-copy experiments on bound gaps: lifted estimators, gap reports,
//! the closed-form lower bound B_M, the σ_z trace-norm sums and random
//! model ensembles.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::{a_matrix, compute, hcrb, ncrb, nhcrb, sld_function, BoundKind};
use crate::error::{Error, Result};
use crate::linalg::{embed_at, eigh, kron, nuclear_norm, CMat, Hermitian, C64, RANK_TOL, SIZE_CAP};
use crate::model::{sld_operators, support_decomposition, tensor_power_model, StatisticalModel, WeightMatrix};
use crate::sdp::{SolverSettings, Status};

/// Gap size above which a gap is said to persist.
pub const GAP_TOL: f64 = 1e-6;

/// X_{i,M} = (1/M) Σ_k X_i acting on copy k.
pub fn mcopy_estimators(x: &[Hermitian], copies: usize) -> Result<Vec<Hermitian>> {
    if copies == 0 {
        return Err(Error::Domain("copy number must be at least 1".into()));
    }
    if copies == 1 {
        return Ok(x.to_vec());
    }
    x.iter()
        .map(|xi| {
            let mut acc = embed_at(xi, 1, copies, SIZE_CAP)?;
            for k in 2..=copies {
                acc = acc.add(&embed_at(xi, k, copies, SIZE_CAP)?);
            }
            Ok(acc.scale(1.0 / copies as f64))
        })
        .collect()
}

/// ‖A(X₂) − ¼(A ⊗ S + S ⊗ A)‖_F for the two-copy lift X₂ of `x`.
pub fn two_copy_a_decomposition_check(m: &StatisticalModel, x: &[Hermitian]) -> Result<f64> {
    let a1 = a_matrix(m, x)?;
    let m2 = tensor_power_model(m, 2)?;
    let x2 = mcopy_estimators(x, 2)?;
    let a2 = a_matrix(&m2, &x2)?;
    let s = m.state().as_mat();
    let want = (&kron(a1.as_mat(), s) + &kron(s, a1.as_mat())).scale_real(0.25);
    Ok((a2.as_mat() - &want).frobenius())
}

/// Which two bounds a gap compares, upper minus lower.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapPair {
    NagaokaHolevo,
    NagaokaHayashiSld,
    NagaokaHayashiHolevo,
    HolevoSld,
}

impl GapPair {
    pub fn kinds(self) -> (BoundKind, BoundKind) {
        match self {
            GapPair::NagaokaHolevo => (BoundKind::Nagaoka, BoundKind::Holevo),
            GapPair::NagaokaHayashiSld => (BoundKind::NagaokaHayashi, BoundKind::Sld),
            GapPair::NagaokaHayashiHolevo => (BoundKind::NagaokaHayashi, BoundKind::Holevo),
            GapPair::HolevoSld => (BoundKind::Holevo, BoundKind::Sld),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GapPair::NagaokaHolevo => "N-H",
            GapPair::NagaokaHayashiSld => "NH-S",
            GapPair::NagaokaHayashiHolevo => "NH-H",
            GapPair::HolevoSld => "H-S",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "N-H" => GapPair::NagaokaHolevo,
            "NH-S" => GapPair::NagaokaHayashiSld,
            "NH-H" => GapPair::NagaokaHayashiHolevo,
            "H-S" => GapPair::HolevoSld,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct GapEntry {
    pub copies: usize,
    /// Bound values of the M-copy model (upper, lower).
    pub upper: f64,
    pub lower: f64,
    /// Δ(M) = upper − lower.
    pub gap: f64,
    /// M·C(M) for both bounds, comparable to the single-copy values.
    pub scaled: (f64, f64),
    pub status: (Status, Status),
    pub relative_gap: (f64, f64),
    pub iterations: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Δ(1) and every Δ(M) exceed the threshold.
    Persists,
    /// Δ(1) exceeds the threshold but some Δ(M) does not.
    Closes,
    /// Δ(1) is already below the threshold.
    BelowTolerance,
    /// Some entry failed; no verdict.
    Incomplete,
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub pair: GapPair,
    /// One entry per requested M; failed solves carry the error text.
    pub entries: Vec<core::result::Result<GapEntry, (usize, String)>>,
    pub verdict: Verdict,
}

impl GapReport {
    pub fn gap(&self, copies: usize) -> Option<f64> {
        self.entries.iter().filter_map(|e| e.as_ref().ok()).find(|e| e.copies == copies).map(|e| e.gap)
    }
}

fn gap_entry(m: &StatisticalModel, pair: GapPair, copies: usize, w: &WeightMatrix, settings: &SolverSettings) -> Result<GapEntry> {
    let mm = tensor_power_model(m, copies)?;
    let (ku, kl) = pair.kinds();
    let u = compute(ku, &mm, w, settings)?;
    let l = compute(kl, &mm, w, settings)?;
    let mf = copies as f64;
    Ok(GapEntry {
        copies,
        upper: u.value,
        lower: l.value,
        gap: u.value - l.value,
        scaled: (mf * u.value, mf * l.value),
        status: (u.diagnostics.status, l.diagnostics.status),
        relative_gap: (u.diagnostics.relative_gap, l.diagnostics.relative_gap),
        iterations: (u.diagnostics.iterations, l.diagnostics.iterations),
    })
}

/// Δ(M) for each M in `copies`, with a persistence verdict at
/// threshold [`GAP_TOL`].
pub fn gap_report(m: &StatisticalModel, pair: GapPair, copies: &[usize], w: &WeightMatrix, settings: &SolverSettings) -> GapReport {
    let entries: Vec<_> = copies
        .iter()
        .map(|&c| gap_entry(m, pair, c, w, settings).map_err(|e| (c, alloc::format!("{e}"))))
        .collect();
    let ok = entries.iter().all(|e| matches!(e, Ok(g) if g.status.0 == Status::Optimal && g.status.1 == Status::Optimal));
    let verdict = if !ok {
        Verdict::Incomplete
    } else {
        let gaps: Vec<(usize, f64)> = entries.iter().map(|e| e.as_ref().map(|g| (g.copies, g.gap)).unwrap()).collect();
        match gaps.iter().find(|(c, _)| *c == 1) {
            Some(&(_, g1)) if g1 <= GAP_TOL => Verdict::BelowTolerance,
            _ if gaps.iter().all(|&(_, g)| g > GAP_TOL) => Verdict::Persists,
            _ => Verdict::Closes,
        }
    };
    GapReport { pair, entries, verdict }
}

/// Parts of B_M kept apart so that the second term survives where it is
/// far below the first in floating point.
#[derive(Clone, Copy, Debug)]
pub struct BmParts {
    /// (1/M) tr S(X² + Y²).
    pub first: f64,
    /// ln of d^{M−1} ‖[X, Y]‖_* / (M² ‖S⁻¹‖_*^M); −∞ for commuting X, Y.
    pub ln_second: f64,
}

impl BmParts {
    pub fn value(&self) -> f64 {
        self.first + self.ln_second.exp()
    }
}

pub fn bm_parts(m: &StatisticalModel, x: &[Hermitian], copies: usize) -> Result<BmParts> {
    if m.n_params() != 2 {
        return Err(Error::WrongArity { expected: 2, found: m.n_params() });
    }
    if copies == 0 {
        return Err(Error::Domain("copy number must be at least 1".into()));
    }
    let mf = copies as f64;
    let first = sld_function(m, x)? / mf;
    let e = eigh(m.state())?;
    let top = e.values.last().copied().unwrap_or(0.0);
    if e.values[0] <= RANK_TOL * top {
        return Err(Error::SingularState);
    }
    let inv_norm: f64 = e.values.iter().map(|v| 1.0 / v).sum();
    let comm = nuclear_norm(&CMat::commutator(x[0].as_mat(), x[1].as_mat()))?;
    let ln_second = (mf - 1.0) * (m.dim() as f64).ln() + comm.ln() - 2.0 * mf.ln() - mf * inv_norm.ln();
    Ok(BmParts { first, ln_second })
}

/// Closed-form lower bound B_M on the Nagaoka function of the M-copy lift.
pub fn bm_lower_bound(m: &StatisticalModel, x: &[Hermitian], copies: usize) -> Result<f64> {
    Ok(bm_parts(m, x, copies)?.value())
}

/// B_M − F_H(X_M) = second term − |tr A(X)|/M, using F_H(X_M) = F_H(X)/M
/// so the common first term cancels exactly. Pass the value of tr A(X)
/// (computed or known in closed form).
pub fn bm_margin(parts: &BmParts, tr_a: f64, copies: usize) -> f64 {
    parts.ln_second.exp() - tr_a.abs() / copies as f64
}

fn ln_choose(m: usize, j: usize) -> f64 {
    libm::lgamma(m as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((m - j) as f64 + 1.0)
}

/// trabs(S^{⊗M} Σ_i σ_z^{(i)}) for S = (I + s_z σ_z)/2, as the binomial sum
/// 2 Σ_j C(M, j) |M/2 − j| p^j q^{M−j} with p = (1 + s_z)/2, accumulated in
/// log space.
pub fn trabs_sz_sum(s_z: f64, copies: usize) -> Result<f64> {
    if !(s_z.abs() <= 1.0) {
        return Err(Error::Domain("|s_z| must be at most 1".into()));
    }
    if copies == 0 {
        return Err(Error::Domain("copy number must be at least 1".into()));
    }
    let (p, q) = ((1.0 + s_z) / 2.0, (1.0 - s_z) / 2.0);
    let (lp, lq) = (p.ln(), q.ln());
    let mf = copies as f64;
    let mut total = 0.0;
    for j in 0..=copies {
        let w = (mf / 2.0 - j as f64).abs();
        if w == 0.0 {
            continue;
        }
        let mut ln = ln_choose(copies, j) + w.ln();
        if j > 0 {
            ln += j as f64 * lp;
        }
        if j < copies {
            ln += (copies - j) as f64 * lq;
        }
        total += ln.exp();
    }
    Ok(2.0 * total)
}

/// 2/M + (2/M²) trabs(S^{⊗M} Σ σ_z): the Nagaoka function of the lifted
/// Holevo optimizer of the qubit s_z model.
pub fn sz_ncrb_upper(s_z: f64, copies: usize) -> Result<f64> {
    let mf = copies as f64;
    Ok(2.0 / mf + 2.0 / (mf * mf) * trabs_sz_sum(s_z, copies)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomModelSpec {
    pub dim: usize,
    pub rank: usize,
    pub n_params: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Redraws allowed per trial before giving up.
pub const MAX_REDRAWS: usize = 100;

impl RandomModelSpec {
    pub fn validate(&self) -> Result<()> {
        let (d, r, n) = (self.dim, self.rank, self.n_params);
        if d == 0 || r == 0 || r > d {
            return Err(Error::Domain(alloc::format!("rank {r} must lie in 1..={d}")));
        }
        let room = r * r + 2 * r * (d - r) - 1;
        if n == 0 || n > room {
            return Err(Error::Domain(alloc::format!("{n} parameters do not fit a rank-{r} state in dimension {d} (at most {room})")));
        }
        Ok(())
    }

    /// Deterministic generator for one trial: the master seed picks the
    /// key and the trial index picks the stream, so trials are independent
    /// of evaluation order.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One model of the ensemble: S = GG†/tr(GG†) with G a d×r complex
/// Gaussian matrix; each derivative a Gaussian Hermitian matrix with its
/// kernel-kernel block removed and made traceless along S.
pub fn random_model_trial(spec: &RandomModelSpec, trial: usize) -> Result<StatisticalModel> {
    spec.validate()?;
    let (d, r, n) = (spec.dim, spec.rank, spec.n_params);
    let mut rng = spec.trial_rng(trial);
    for _ in 0..MAX_REDRAWS {
        let g = CMat::from_fn(d, r, |_, _| C64::new(gauss(&mut rng), gauss(&mut rng)));
        let gg = g.matmul(&g.adjoint());
        let s = Hermitian::symmetrize(gg.scale_real(1.0 / gg.trace().re));
        let sd = match support_decomposition(&s, RANK_TOL) {
            Ok(sd) if sd.rank == r => sd,
            _ => continue,
        };
        let derivs: Vec<Hermitian> = (0..n)
            .map(|_| {
                let h = CMat::from_fn(d, d, |_, _| C64::new(gauss(&mut rng), gauss(&mut rng)));
                let h = Hermitian::symmetrize(&h + &h.adjoint());
                let mut e = sd.to_eigenbasis(&h).into_mat();
                for a in r..d {
                    for b in r..d {
                        e[(a, b)] = C64::new(0.0, 0.0);
                    }
                }
                let h = sd.from_eigenbasis(&e);
                let t = h.tr();
                h.sub(&s.scale(t))
            })
            .collect();
        let label = alloc::format!("random(d={d}, r={r}, n={n}, seed={}, trial={trial})", spec.seed);
        if let Ok(m) = StatisticalModel::new(s, derivs, label) {
            if sld_operators(&m).is_ok() {
                return Ok(m);
            }
        }
    }
    Err(Error::Exhausted(MAX_REDRAWS))
}

pub fn random_model(spec: &RandomModelSpec) -> Result<Vec<StatisticalModel>> {
    (0..spec.trials).map(|t| random_model_trial(spec, t)).collect()
}

/// Row of the two-copy persistence scatter.
#[derive(Clone, Debug)]
pub struct ScatterRow {
    pub trial: usize,
    pub d: usize,
    pub r: usize,
    pub n: usize,
    /// (C_NH − C_H)/2 for one copy.
    pub gap1_half: f64,
    /// C_NH(2) − C_H(2).
    pub gap2: f64,
    pub status1: Status,
    pub status2: Status,
}

fn worst(a: Status, b: Status) -> Status {
    if a == Status::Optimal {
        b
    } else {
        a
    }
}

pub fn persistence_row(spec: &RandomModelSpec, trial: usize, copies: usize, settings: &SolverSettings) -> Result<ScatterRow> {
    let m = random_model_trial(spec, trial)?;
    let w = WeightMatrix::identity(m.n_params());
    let one = (nhcrb(&m, &w, settings)?, hcrb(&m, &w, settings)?);
    let mm = tensor_power_model(&m, copies)?;
    let two = (nhcrb(&mm, &w, settings)?, hcrb(&mm, &w, settings)?);
    Ok(ScatterRow {
        trial,
        d: spec.dim,
        r: spec.rank,
        n: spec.n_params,
        gap1_half: (one.0.value - one.1.value) / copies as f64,
        gap2: two.0.value - two.1.value,
        status1: worst(one.0.diagnostics.status, one.1.diagnostics.status),
        status2: worst(two.0.diagnostics.status, two.1.diagnostics.status),
    })
}

/// Rows for every trial that could be generated and solved; failed trials
/// are skipped.
pub fn persistence_scatter(spec: &RandomModelSpec, copies: usize, settings: &SolverSettings) -> Vec<ScatterRow> {
    (0..spec.trials).filter_map(|t| persistence_row(spec, t, copies, settings).ok()).collect()
}

/// Row of the single-copy random-gap study.
#[derive(Clone, Debug)]
pub struct RandomGapRow {
    pub trial: usize,
    pub d: usize,
    pub ncrb: f64,
    pub hcrb: f64,
    /// (ncrb − hcrb)/hcrb.
    pub rel_gap: f64,
    pub status: Status,
}

pub fn random_gap_row(spec: &RandomModelSpec, trial: usize, settings: &SolverSettings) -> Result<RandomGapRow> {
    let m = random_model_trial(spec, trial)?;
    let w = WeightMatrix::identity(m.n_params());
    let n = ncrb(&m, &w, settings)?;
    let h = hcrb(&m, &w, settings)?;
    Ok(RandomGapRow {
        trial,
        d: spec.dim,
        ncrb: n.value,
        hcrb: h.value,
        rel_gap: (n.value - h.value) / h.value,
        status: worst(n.diagnostics.status, h.diagnostics.status),
    })
}
