//! Built-in models with closed-form reference values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::bounds::BoundKind;
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, CMat, Hermitian, C64, I, ONE};
use crate::model::StatisticalModel;

fn domain(msg: &str) -> Error {
    Error::Domain(msg.into())
}

fn finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(domain("parameters must be finite"))
    }
}

/// Qubit state with populations cos²(λ/2), sin²(λ/2) and coherence
/// cos(λ/2)sin(λ/2)e^{∓iφ} damped by e^{−δ²}. Parameters are (φ, δ).
pub fn phase_diffusion(lambda: f64, phi: f64, delta: f64) -> Result<StatisticalModel> {
    finite(&[lambda, phi, delta])?;
    if delta <= 0.0 {
        return Err(domain("phase diffusion requires delta > 0"));
    }
    let damp = (-delta * delta).exp();
    let (state, dphi, coh) = diffusion_parts(lambda, phi, damp);
    let ddelta = coh.scale(-2.0 * delta);
    StatisticalModel::new(state, vec![dphi, ddelta], format!("phase_diffusion(lambda={lambda}, phi={phi}, delta={delta})"))
}

/// Same state with δ = √δ̃, so the δ̃-derivative survives at δ̃ = 0.
pub fn phase_diffusion_reparam_tilde(lambda: f64, phi: f64, delta_tilde: f64) -> Result<StatisticalModel> {
    finite(&[lambda, phi, delta_tilde])?;
    if delta_tilde < 0.0 {
        return Err(domain("delta_tilde must be non-negative"));
    }
    let damp = (-delta_tilde).exp();
    let (state, dphi, coh) = diffusion_parts(lambda, phi, damp);
    let dt = coh.scale(-1.0);
    StatisticalModel::new(state, vec![dphi, dt], format!("phase_diffusion_tilde(lambda={lambda}, phi={phi}, delta_tilde={delta_tilde})"))
}

/// (S, ∂_φ S, coherence part of S) for a coherence damping factor.
fn diffusion_parts(lambda: f64, phi: f64, damp: f64) -> (Hermitian, Hermitian, Hermitian) {
    let (s, c) = (lambda / 2.0).sin_cos();
    let off = C64::from_polar(c * s * damp, -phi);
    let state = Hermitian::symmetrize(CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => ONE * (c * c),
        (1, 1) => ONE * (s * s),
        (0, 1) => off,
        _ => off.conj(),
    }));
    let dphi = Hermitian::symmetrize(CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I * off,
        (1, 0) => I * off.conj(),
        _ => C64::new(0.0, 0.0),
    }));
    let coh = Hermitian::symmetrize(CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => off,
        (1, 0) => off.conj(),
        _ => C64::new(0.0, 0.0),
    }));
    (state, dphi, coh)
}

/// Branch selector of the closed-form Holevo bound:
/// β = 1 − (e^{2δ²} − 1)|cos λ| / (2δ).
pub fn phase_diffusion_beta(lambda: f64, delta: f64) -> f64 {
    1.0 - (2.0 * delta * delta).exp_m1() * lambda.cos().abs() / (2.0 * delta)
}

/// RLD bound of the phase-diffusion model (the β ≤ 0 branch).
pub fn phase_diffusion_rld_bound(lambda: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    let sin2 = lambda.sin().powi(2);
    (2.0 * d2).exp_m1() * (1.0 + 4.0 * d2 + 4.0 * delta * lambda.cos().abs()) / (4.0 * d2 * sin2)
}

/// The β ≥ 0 branch of the closed-form Holevo bound.
pub fn phase_diffusion_gamma(lambda: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    let sin2 = lambda.sin().powi(2);
    let em = (2.0 * d2).exp_m1();
    // e^{4δ²} − 1 = em (em + 2)
    (em * (em + 2.0) + 8.0 * (2.0 * d2).exp() * d2 + (2.0 * lambda).cos() * em * em) / (8.0 * d2 * sin2)
}

/// Closed-form Holevo bound. The two branches agree where β = 0, so near
/// the boundary the branch is chosen by sign without a tie rule.
pub fn phase_diffusion_hcrb_oracle(lambda: f64, delta: f64) -> f64 {
    if phase_diffusion_beta(lambda, delta) < 0.0 {
        phase_diffusion_rld_bound(lambda, delta)
    } else {
        phase_diffusion_gamma(lambda, delta)
    }
}

/// Closed-form Nagaoka bound (tr J^{-1/2})².
pub fn phase_diffusion_ncrb_oracle(lambda: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    let q = -(-2.0 * d2).exp_m1();
    (2.0 * d2).exp() / lambda.sin().powi(2) * (1.0 + q / (4.0 * d2) + q.sqrt() / delta)
}

/// Closed-form Holevo optimizer at λ = π/2, φ = 0 (where β = 1):
/// X = e^{δ²}σ_y and Y = (I − e^{δ²}σ_x)/(2δ). Here tr A(X) vanishes
/// identically, so the bound equals tr S(X² + Y²).
pub fn phase_diffusion_holevo_optimizer_half_pi(delta: f64) -> [Hermitian; 2] {
    let [sx, sy, _] = pauli();
    let e = (delta * delta).exp();
    let y = Hermitian::identity(2).sub(&sx.scale(e)).scale(0.5 / delta);
    [sy.scale(e), y]
}

/// SLDs and RLDs of the phase-diffusion model at φ = 0.
#[derive(Clone, Debug)]
pub struct DiffusionDerivatives {
    pub sld_phi: Hermitian,
    pub sld_delta: Hermitian,
    pub rld_phi: CMat,
    pub rld_delta: CMat,
}

pub fn phase_diffusion_sld_rld_oracle(lambda: f64, delta: f64) -> DiffusionDerivatives {
    let d2 = delta * delta;
    let (sl, cl) = lambda.sin_cos();
    let e = (-d2).exp();
    let coth = 1.0 / d2.tanh();
    let csch = 1.0 / d2.sinh();
    let t = (lambda / 2.0).tan();
    let ct = 1.0 / t;
    let z = C64::new(0.0, 0.0);
    let sld_phi = Hermitian::symmetrize(CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I * (e * sl),
        (1, 0) => I * (e * sl),
        _ => z,
    }));
    let sld_delta = Hermitian::from_real(
        2,
        &[
            delta * (1.0 - cl) * (coth - 1.0),
            -delta * csch * sl,
            -delta * csch * sl,
            delta * (1.0 + cl) * (coth - 1.0),
        ],
    );
    // The lower off-diagonal entries carry cot(λ/2); this is what
    // S_i = S·RLD_i requires.
    let rld_phi = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => -I * (0.5 * (coth - 1.0)),
        (0, 1) => -I * (0.5 * csch * t),
        (1, 0) => I * (0.5 * csch * ct),
        _ => I * (0.5 * (coth - 1.0)),
    });
    let rld_delta = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => ONE * (-delta * csch * t),
        (1, 0) => ONE * (-delta * csch * ct),
        _ => ONE * (delta * (coth - 1.0)),
    });
    DiffusionDerivatives { sld_phi, sld_delta, rld_phi, rld_delta }
}

/// Bloch-vector qubit (I + s_z σ_z)/2 with unknown in-plane components
/// evaluated at zero.
pub fn qubit_sz(s_z: f64) -> Result<StatisticalModel> {
    finite(&[s_z])?;
    if !(s_z != 0.0 && s_z.abs() < 1.0) {
        return Err(domain("qubit_sz requires 0 < |s_z| < 1"));
    }
    let [x, y, zp] = pauli();
    let state = Hermitian::identity(2).add(&zp.scale(s_z)).scale(0.5);
    StatisticalModel::new(state, vec![x.scale(0.5), y.scale(0.5)], format!("qubit_sz(s_z={s_z})"))
}

pub fn qubit_sz_hcrb_oracle(s_z: f64) -> f64 {
    2.0 + 2.0 * s_z.abs()
}

/// Single-qubit dephasing that scales coherences by `q`.
fn phase_damping(rho: &CMat, q: f64, qubit: usize) -> CMat {
    let k0 = CMat::diag_real(&[1.0, q]);
    let k1 = CMat::diag_real(&[0.0, (1.0 - q * q).sqrt()]);
    let id = CMat::identity(2);
    let lift = |k: &CMat| if qubit == 0 { kron(k, &id) } else { kron(&id, k) };
    let mut out = CMat::zeros(4, 4);
    for k in [lift(&k0), lift(&k1)] {
        out += &k.matmul(rho).matmul(&k.adjoint());
    }
    out
}

/// (|01⟩ + |10⟩)/√2 rotated by exp(−iθ_j σ_j/2) on the first qubit, then
/// dephased on the first qubit with coherences scaled by 1 − ε;
/// parameters (θ_x, θ_y, θ_z) at zero.
pub fn bell_phase_damping(eps: f64) -> Result<StatisticalModel> {
    finite(&[eps])?;
    if !(0.0..1.0).contains(&eps) {
        return Err(domain("bell_phase_damping requires 0 <= epsilon < 1"));
    }
    let mut psi = vec![C64::new(0.0, 0.0); 4];
    psi[1] = ONE * core::f64::consts::FRAC_1_SQRT_2;
    psi[2] = psi[1];
    let rho = CMat::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
    let id = CMat::identity(2);
    let channel = |r: &CMat| phase_damping(r, 1.0 - eps, 0);
    let state = Hermitian::symmetrize(channel(&rho));
    let derivs = pauli()
        .iter()
        .map(|s| {
            let g = kron(s.as_mat(), &id);
            // d/dθ (UρU†) at θ = 0 is −(i/2)[σ ⊗ I, ρ].
            let d = CMat::commutator(&g, &rho).scale(-I * 0.5);
            Hermitian::symmetrize(channel(&d))
        })
        .collect();
    StatisticalModel::new(state, derivs, format!("bell_phase_damping(epsilon={eps})"))
}

pub fn bell_hcrb_oracle(eps: f64) -> f64 {
    2.0 + 1.0 / (1.0 - eps).powi(2)
}

pub fn bell_nhcrb_oracle(eps: f64) -> f64 {
    4.0 / (2.0 - eps) + 1.0 / (1.0 - eps).powi(2)
}

/// Diagonal state diag(p) with diagonal derivatives.
pub fn classical_diagonal(p: &[f64], directions: &[Vec<f64>]) -> Result<StatisticalModel> {
    finite(p)?;
    if p.iter().any(|&v| v <= 0.0) {
        return Err(domain("probabilities must be strictly positive"));
    }
    for dvec in directions {
        finite(dvec)?;
        if dvec.len() != p.len() {
            return Err(Error::Shape(format!("direction has {} entries, expected {}", dvec.len(), p.len())));
        }
    }
    let derivs = directions.iter().map(|dv| Hermitian::diag(dv)).collect();
    StatisticalModel::new(Hermitian::diag(p), derivs, format!("classical_diagonal(p={p:?})"))
}

/// Named parameter with its default value.
#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub name: &'static str,
    pub default: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [Param],
    /// Human-readable parameter domain.
    pub domain: &'static str,
    /// Bounds that have a closed form for this entry.
    pub oracles: &'static [BoundKind],
}

const fn p(name: &'static str, default: f64) -> Param {
    Param { name, default }
}

static ENTRIES: [CatalogEntry; 5] = [
    CatalogEntry {
        name: "phase_diffusion",
        params: &[p("lambda", core::f64::consts::FRAC_PI_2), p("phi", 0.0), p("delta", 0.5)],
        domain: "lambda not a multiple of pi, delta > 0",
        oracles: &[BoundKind::Holevo, BoundKind::Nagaoka],
    },
    CatalogEntry {
        name: "phase_diffusion_tilde",
        params: &[p("lambda", core::f64::consts::FRAC_PI_2), p("phi", 0.0), p("delta_tilde", 0.09)],
        domain: "lambda not a multiple of pi, delta_tilde > 0 (the pure limit delta_tilde = 0 is rejected)",
        oracles: &[],
    },
    CatalogEntry {
        name: "qubit_sz",
        params: &[p("s_z", 0.5)],
        domain: "0 < |s_z| < 1",
        oracles: &[BoundKind::Sld, BoundKind::Holevo],
    },
    CatalogEntry {
        name: "bell_phase_damping",
        params: &[p("epsilon", 0.5)],
        domain: "0 <= epsilon < 1",
        oracles: &[BoundKind::Sld, BoundKind::Holevo, BoundKind::NagaokaHayashi],
    },
    CatalogEntry {
        name: "classical_diagonal",
        params: &[p("p1", 0.5), p("p2", 0.3)],
        domain: "p1, p2 > 0, p1 + p2 < 1; directions diag(1,-1,0)/2, diag(0,1,-1)/2",
        oracles: &[],
    },
];

pub fn entries() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

impl CatalogEntry {
    /// Parameter values with defaults filled in for missing names.
    /// Unknown names are an error.
    pub fn resolve(&self, given: &[(&str, f64)]) -> Result<Vec<f64>> {
        for (name, _) in given {
            if !self.params.iter().any(|p| p.name == *name) {
                return Err(domain(&format!("{} has no parameter '{}'", self.name, name)));
            }
        }
        Ok(self
            .params
            .iter()
            .map(|p| given.iter().rev().find(|(n, _)| *n == p.name).map_or(p.default, |g| g.1))
            .collect())
    }

    /// Build the model from values ordered as in `params`.
    pub fn build(&self, v: &[f64]) -> Result<StatisticalModel> {
        if v.len() != self.params.len() {
            return Err(Error::Shape(format!("{} takes {} parameters", self.name, self.params.len())));
        }
        match self.name {
            "phase_diffusion" => phase_diffusion(v[0], v[1], v[2]),
            "phase_diffusion_tilde" => phase_diffusion_reparam_tilde(v[0], v[1], v[2]),
            "qubit_sz" => qubit_sz(v[0]),
            "bell_phase_damping" => bell_phase_damping(v[0]),
            "classical_diagonal" => {
                let p3 = 1.0 - v[0] - v[1];
                classical_diagonal(&[v[0], v[1], p3], &[vec![0.5, -0.5, 0.0], vec![0.0, 0.5, -0.5]])
            }
            _ => unreachable!("catalog entry without constructor"),
        }
    }

    /// Closed-form value of `kind` at identity weight, where one exists.
    pub fn oracle(&self, kind: BoundKind, v: &[f64]) -> Option<f64> {
        if !self.oracles.contains(&kind) || v.len() != self.params.len() {
            return None;
        }
        Some(match (self.name, kind) {
            ("phase_diffusion", BoundKind::Holevo) => phase_diffusion_hcrb_oracle(v[0], v[2]),
            ("phase_diffusion", BoundKind::Nagaoka) => phase_diffusion_ncrb_oracle(v[0], v[2]),
            ("qubit_sz", BoundKind::Sld) => 2.0,
            ("qubit_sz", BoundKind::Holevo) => qubit_sz_hcrb_oracle(v[0]),
            ("bell_phase_damping", BoundKind::Sld | BoundKind::Holevo) => bell_hcrb_oracle(v[0]),
            ("bell_phase_damping", BoundKind::NagaokaHayashi) => bell_nhcrb_oracle(v[0]),
            _ => return None,
        })
    }
}
