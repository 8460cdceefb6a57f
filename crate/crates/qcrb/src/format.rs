//! JSON and CSV formats.
//!
//! Matrices are nested arrays of `[re, im]` pairs, row-major. A model file
//! is `{"d", "n", "S", "derivs", "label"}`; unknown keys are rejected.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use qcrb_core::bounds::BoundResult;
use qcrb_core::linalg::{CMat, Hermitian, C64};
use qcrb_core::model::StatisticalModel;
use qcrb_core::sdp::{ConicProgram, Field};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "S")]
    pub s: MatrixJson,
    pub derivs: Vec<MatrixJson>,
    pub label: String,
}

pub fn matrix_to_json(a: &Hermitian) -> MatrixJson {
    let m = a.as_mat();
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn matrix_from_json(rows: &MatrixJson, d: usize, what: &str) -> Result<Hermitian> {
    if rows.len() != d {
        bail!("{what}: {} rows, expected {d}", rows.len());
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            bail!("{what}: row {i} has {} entries, expected {d}", row.len());
        }
    }
    let m = CMat::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
    Hermitian::new(m).with_context(|| format!("{what}: not Hermitian"))
}

impl ModelFile {
    pub fn from_model(m: &StatisticalModel) -> Self {
        ModelFile {
            d: m.dim(),
            n: m.n_params(),
            s: matrix_to_json(m.state()),
            derivs: m.derivs().iter().map(matrix_to_json).collect(),
            label: m.label().to_string(),
        }
    }

    pub fn to_model(&self) -> Result<StatisticalModel> {
        if self.d == 0 {
            bail!("d: must be at least 1");
        }
        if self.derivs.len() != self.n {
            bail!("derivs: {} matrices, but n = {}", self.derivs.len(), self.n);
        }
        let s = matrix_from_json(&self.s, self.d, "S")?;
        let derivs = self
            .derivs
            .iter()
            .enumerate()
            .map(|(k, dm)| matrix_from_json(dm, self.d, &format!("derivs[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        StatisticalModel::new(s, derivs, self.label.clone()).context("model")
    }
}

/// Parse a model file; syntax errors carry line and column.
pub fn parse_model(text: &str) -> Result<StatisticalModel> {
    let f: ModelFile = serde_json::from_str(text).context("model file")?;
    f.to_model()
}

pub fn model_to_string(m: &StatisticalModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(m)).expect("model serialization cannot fail")
}

/// Serialized bound result. `value` and `gap` are null when not finite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundRecord {
    pub bound: String,
    pub value: Option<f64>,
    pub copies: usize,
    /// Relative duality gap reported by the solver (0 for closed forms).
    pub gap: Option<f64>,
    pub status: String,
    pub optimizer: Vec<MatrixJson>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl BoundRecord {
    pub fn from_result(r: &BoundResult) -> Self {
        BoundRecord {
            bound: r.kind.as_str().to_string(),
            value: finite(r.value),
            copies: r.copies,
            gap: finite(r.diagnostics.relative_gap),
            status: r.diagnostics.status.as_str().to_string(),
            optimizer: r.optimizer.iter().map(matrix_to_json).collect(),
        }
    }

    /// Record for a bound whose computation raised an error.
    pub fn failed(bound: &str, copies: usize, message: &str) -> Self {
        BoundRecord {
            bound: bound.to_string(),
            value: None,
            copies,
            gap: None,
            status: format!("error: {message}"),
            optimizer: Vec::new(),
        }
    }
}

/// Debug dump of a conic program: `n_vars`, `c`, sparse equality rows `A`
/// as `[row, var, coef]` triplets with right-hand side `b`, and `blocks`
/// with vectorized constant and sparse `[var, index, coef]` coefficients.
pub fn program_to_json(p: &ConicProgram) -> Value {
    let a: Vec<Value> = p
        .eq_rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |&(v, c)| json!([r, v, c])))
        .collect();
    let blocks: Vec<Value> = p
        .blocks
        .iter()
        .map(|b| {
            let coeffs: Vec<Value> = b
                .coeffs
                .iter()
                .enumerate()
                .flat_map(|(v, list)| list.iter().map(move |&(k, c)| json!([v, k, c])))
                .collect();
            json!({
                "dim": b.dim,
                "field": match b.field { Field::Real => "real", Field::Complex => "complex" },
                "constant": b.constant,
                "coeffs": coeffs,
            })
        })
        .collect();
    json!({
        "n_vars": p.n_vars,
        "c": p.c,
        "A": a,
        "b": p.eq_rhs,
        "blocks": blocks,
    })
}

/// Float with 12 significant digits, shortest form.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mut s = trim_zeros(mant.to_string());
        let _ = write!(s, "e{e}");
        s
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::fmt12;

    #[test]
    fn fmt12_examples() {
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(2.297443052_f64), "2.297443052");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-1.5e-9), "-1.5e-9");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(f64::NAN), "NaN");
    }
}
