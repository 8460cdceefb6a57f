//! Command-line surface. [`run`] returns the process exit code:
//! 0 success, 1 usage or input error, 2 numerical degradation (partial
//! results are still written).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcrb_core::bounds::{bound_program, compute as compute_bound, BoundKind, BoundResult};
use qcrb_core::catalog;
use qcrb_core::gap::{persistence_row, random_gap_row, GapPair, RandomModelSpec};
use qcrb_core::model::{tensor_power_model, StatisticalModel, WeightMatrix};
use qcrb_core::sdp::{SolverSettings, Status};
use rayon::prelude::*;
use serde_json::Value;

use crate::format::{fmt12, model_to_string, parse_model, program_to_json, BoundRecord};
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qcrb", version, about = "Multiparameter quantum Cramér-Rao bounds")]
pub struct Cli {
    /// Output format; the default depends on the command.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed for random studies.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Defaults to 1 for compute and
    /// verify and to all cores for sweep and random.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Relative duality-gap tolerance of the conic solver.
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,
    /// Largest copy number accepted.
    #[arg(long, global = true, default_value_t = 4)]
    pub max_copies: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds for one model.
    Compute(ComputeArgs),
    /// Bounds over a grid of catalog parameters.
    Sweep(SweepArgs),
    /// Random-model studies.
    Random(RandomArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
    /// Write a model file, or list the catalog.
    ExportModel(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Catalog entry name.
    #[arg(long, conflicts_with = "model_file")]
    pub model: Option<String>,
    /// Model file in the JSON model format.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Catalog parameter as name=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Comma-separated bounds: sld, hcrb, ncrb, nhcrb.
    #[arg(long, value_delimiter = ',', default_value = "sld,hcrb,ncrb,nhcrb", value_parser = parse_bound)]
    pub bounds: Vec<BoundKind>,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Weight matrix, row-major n×n or its n diagonal entries.
    #[arg(long, value_delimiter = ',')]
    pub weight: Option<Vec<f64>>,
    /// Write the conic program of each optimized bound to this JSON file.
    #[arg(long)]
    pub dump_program: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Catalog entry name.
    #[arg(long)]
    pub model: String,
    /// Fixed catalog parameter as name=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Grid axis as name=start:stop:count; at most two.
    #[arg(long = "grid", value_parser = parse_grid, required = true)]
    pub grid: Vec<GridAxis>,
    #[arg(long, value_delimiter = ',', default_value = "hcrb,ncrb", value_parser = parse_bound)]
    pub bounds: Vec<BoundKind>,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Study {
    /// Single-copy (ncrb − hcrb)/hcrb per trial.
    Gap,
    /// One-copy against multi-copy Nagaoka-Hayashi/Holevo gaps.
    Persistence,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long, value_enum, default_value = "gap")]
    pub study: Study,
    #[arg(long)]
    pub dim: usize,
    /// State rank; defaults to full rank.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub n_params: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Copy number of the persistence study.
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub level: verify::Level,
    /// Comma-separated criterion numbers; default all.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
    /// Shift every closed-form target by this amount (harness self-test).
    #[arg(long, default_value_t = 0.0, hide = true)]
    pub perturb: f64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// List catalog entries with their parameters and domains.
    #[arg(long)]
    pub list: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_bound(s: &str) -> Result<BoundKind, String> {
    BoundKind::parse(s.trim()).ok_or_else(|| format!("unknown bound '{s}' (expected sld, hcrb, ncrb or nhcrb)"))
}

fn parse_grid(s: &str) -> Result<GridAxis, String> {
    let (name, spec) = s.split_once('=').ok_or_else(|| format!("expected name=start:stop:count, got '{s}'"))?;
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:count, got '{spec}'"));
    }
    let a: f64 = parts[0].parse().map_err(|_| format!("bad start '{}'", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|_| format!("bad stop '{}'", parts[1]))?;
    let k: usize = parts[2].parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
    let values = match k {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
    };
    Ok(GridAxis { name: name.trim().to_string(), values })
}

/// Tabular output shared by the CSV and JSON writers.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| match c {
                Cell::Num(x) => fmt12(*x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(t) => t.clone(),
            }))?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj = self
                        .headers
                        .iter()
                        .zip(r)
                        .map(|(h, c)| {
                            let v = match c {
                                Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
                                Cell::Int(i) => Value::from(*i),
                                Cell::Text(t) => Value::from(t.clone()),
                            };
                            (h.clone(), v)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    fn render(&self, f: Format) -> Result<String> {
        match f {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json())? + "\n"),
        }
    }
}

/// Errors that come from the numerics rather than from the input.
fn is_numerical(e: &qcrb_core::Error) -> bool {
    use qcrb_core::Error as E;
    matches!(e, E::NoConvergence { .. } | E::Solver(_) | E::NotPositiveDefinite | E::Exhausted(_))
}

fn settings(cli: &Cli) -> Result<SolverSettings> {
    let mut s = SolverSettings::default();
    if let Some(t) = cli.gap_tol {
        s.gap_tol = t;
    }
    s.validate().context("solver settings")?;
    Ok(s)
}

fn load_model(src: &ModelSource) -> Result<StatisticalModel> {
    match (&src.model, &src.model_file) {
        (Some(name), None) => {
            let e = catalog::entry(name).ok_or_else(|| {
                let names: Vec<&str> = catalog::entries().iter().map(|e| e.name).collect();
                anyhow!("unknown catalog model '{name}' (available: {})", names.join(", "))
            })?;
            let given: Vec<(&str, f64)> = src.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            Ok(e.build(&e.resolve(&given)?)?)
        }
        (None, Some(path)) => {
            if !src.params.is_empty() {
                bail!("--param applies to catalog models only");
            }
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_model(&text).with_context(|| format!("in {}", path.display()))
        }
        _ => bail!("exactly one of --model or --model-file is required"),
    }
}

fn weight(n: usize, w: &Option<Vec<f64>>) -> Result<WeightMatrix> {
    Ok(match w {
        None => WeightMatrix::identity(n),
        Some(v) if v.len() == n => WeightMatrix::diag(v)?,
        Some(v) if v.len() == n * n => WeightMatrix::new(n, v.clone())?,
        Some(v) => bail!("--weight has {} entries; the model has {n} parameters (give {n} or {})", v.len(), n * n),
    })
}

fn check_copies(copies: usize, cap: usize) -> Result<()> {
    if copies == 0 || copies > cap {
        bail!("--copies {copies} outside 1..={cap} (raise --max-copies to allow more)");
    }
    Ok(())
}

fn check_arity(bounds: &[BoundKind], n: usize) -> Result<()> {
    if n != 2 && bounds.contains(&BoundKind::Nagaoka) {
        bail!("{}", qcrb_core::Error::WrongArity { expected: 2, found: n });
    }
    Ok(())
}

struct Emitted {
    text: String,
    degraded: bool,
}

fn emit(cli: &Cli, e: &Emitted) -> Result<i32> {
    match &cli.out {
        Some(p) => fs::write(p, &e.text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(e.text.as_bytes())?,
    }
    Ok(if e.degraded { 2 } else { 0 })
}

fn pool(jobs: Option<usize>, default: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(default)).build()?)
}

/// Parse arguments and run. Usage errors print clap's message.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let s = settings(cli)?;
    let out = match &cli.command {
        Command::Compute(a) => pool(cli.jobs, 1)?.install(|| cmd_compute(cli, a, &s))?,
        Command::Sweep(a) => pool(cli.jobs, 0)?.install(|| cmd_sweep(cli, a, &s))?,
        Command::Random(a) => pool(cli.jobs, 0)?.install(|| cmd_random(cli, a, &s))?,
        Command::Verify(a) => pool(cli.jobs, 1)?.install(|| cmd_verify(cli, a, &s))?,
        Command::ExportModel(a) => cmd_export(cli, a)?,
    };
    emit(cli, &out)
}

fn cmd_compute(cli: &Cli, a: &ComputeArgs, s: &SolverSettings) -> Result<Emitted> {
    check_copies(a.copies, cli.max_copies)?;
    let base = load_model(&a.source)?;
    check_arity(&a.bounds, base.n_params())?;
    let w = weight(base.n_params(), &a.weight)?;
    let m = tensor_power_model(&base, a.copies)?;
    if let Some(path) = &a.dump_program {
        let progs: serde_json::Map<String, Value> = a
            .bounds
            .iter()
            .filter(|k| **k != BoundKind::Sld)
            .map(|k| Ok((k.as_str().to_string(), program_to_json(&bound_program(*k, &m, &w)?))))
            .collect::<Result<_>>()?;
        fs::write(path, serde_json::to_string_pretty(&Value::Object(progs))?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let results: Vec<std::result::Result<BoundResult, qcrb_core::Error>> =
        a.bounds.par_iter().map(|k| compute_bound(*k, &m, &w, s)).collect();
    let mut records = Vec::new();
    let mut degraded = false;
    for (k, r) in a.bounds.iter().zip(results) {
        match r {
            Ok(r) => {
                degraded |= r.diagnostics.status != Status::Optimal;
                records.push(BoundRecord::from_result(&r));
            }
            Err(e) if is_numerical(&e) => {
                degraded = true;
                records.push(BoundRecord::failed(k.as_str(), m.copies(), &e.to_string()));
            }
            Err(e) => return Err(anyhow!("{}: {e}", k.as_str())),
        }
    }
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&records)? + "\n",
        Format::Csv => Table {
            headers: ["bound", "value", "copies", "gap", "status"].map(String::from).to_vec(),
            rows: records
                .iter()
                .map(|r| {
                    vec![
                        Cell::Text(r.bound.clone()),
                        Cell::Num(r.value.unwrap_or(f64::NAN)),
                        Cell::Int(r.copies),
                        Cell::Num(r.gap.unwrap_or(f64::NAN)),
                        Cell::Text(r.status.clone()),
                    ]
                })
                .collect(),
        }
        .to_csv()?,
    };
    Ok(Emitted { text, degraded })
}

/// Gap pairs whose two bounds were both requested, as (label, upper, lower).
fn gap_columns(bounds: &[BoundKind]) -> Vec<(String, usize, usize)> {
    let pairs = [GapPair::NagaokaHolevo, GapPair::NagaokaHayashiSld, GapPair::NagaokaHayashiHolevo, GapPair::HolevoSld];
    pairs
        .iter()
        .filter_map(|p| {
            let (u, l) = p.kinds();
            let iu = bounds.iter().position(|b| *b == u)?;
            let il = bounds.iter().position(|b| *b == l)?;
            Some((format!("gap_{}", p.as_str()), iu, il))
        })
        .collect()
}

pub fn sweep_table(a: &SweepArgs, s: &SolverSettings) -> Result<(Table, bool)> {
    let e = catalog::entry(&a.model).ok_or_else(|| anyhow!("unknown catalog model '{}'", a.model))?;
    if a.grid.len() > 2 {
        bail!("at most two --grid axes are supported");
    }
    for g in &a.grid {
        if !e.params.iter().any(|p| p.name == g.name) {
            bail!("{} has no parameter '{}'", e.name, g.name);
        }
        if a.params.iter().any(|(k, _)| *k == g.name) {
            bail!("'{}' is both fixed and swept", g.name);
        }
    }
    let mut fixed: Vec<(&str, f64)> = a.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    // Validate names and arity once, up front.
    let probe: Vec<(&str, f64)> = fixed.iter().copied().chain(a.grid.iter().map(|g| (g.name.as_str(), g.values.first().copied().unwrap_or(0.0)))).collect();
    e.resolve(&probe)?;
    let n = e.build(&e.resolve(&[])?)?.n_params();
    check_arity(&a.bounds, n)?;
    let points: Vec<Vec<f64>> = match a.grid.as_slice() {
        [g] => g.values.iter().map(|&v| vec![v]).collect(),
        [g, h] => g.values.iter().flat_map(|&u| h.values.iter().map(move |&v| vec![u, v])).collect(),
        _ => Vec::new(),
    };
    let gaps = gap_columns(&a.bounds);
    let mut headers: Vec<String> = a.grid.iter().map(|g| g.name.clone()).collect();
    headers.extend(a.bounds.iter().map(|b| b.as_str().to_string()));
    headers.extend(gaps.iter().map(|g| g.0.clone()));
    headers.push("status".into());
    fixed.sort_by(|x, y| x.0.cmp(y.0));
    let w = WeightMatrix::identity(n);
    let rows: Vec<(Vec<Cell>, bool)> = points
        .par_iter()
        .map(|pt| {
            let mut given = fixed.clone();
            given.extend(a.grid.iter().zip(pt).map(|(g, v)| (g.name.as_str(), *v)));
            let mut vals = vec![f64::NAN; a.bounds.len()];
            let mut notes = Vec::new();
            match e.resolve(&given).and_then(|v| e.build(&v)).and_then(|m| tensor_power_model(&m, a.copies)) {
                Err(err) => notes.push(format!("model: {err}")),
                Ok(m) => {
                    for (k, b) in a.bounds.iter().enumerate() {
                        match compute_bound(*b, &m, &w, s) {
                            Ok(r) if r.is_optimal() => vals[k] = r.value,
                            Ok(r) => {
                                vals[k] = r.value;
                                notes.push(format!("{}: {}", b.as_str(), r.diagnostics.status.as_str()));
                            }
                            Err(err) => notes.push(format!("{}: {err}", b.as_str())),
                        }
                    }
                }
            }
            let mut row: Vec<Cell> = pt.iter().map(|&v| Cell::Num(v)).collect();
            row.extend(vals.iter().map(|&v| Cell::Num(v)));
            row.extend(gaps.iter().map(|&(_, u, l)| Cell::Num(vals[u] - vals[l])));
            let ok = notes.is_empty();
            row.push(Cell::Text(if ok { "optimal".into() } else { notes.join("; ") }));
            (row, ok)
        })
        .collect();
    let degraded = rows.iter().any(|r| !r.1);
    Ok((Table { headers, rows: rows.into_iter().map(|r| r.0).collect() }, degraded))
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs, s: &SolverSettings) -> Result<Emitted> {
    check_copies(a.copies, cli.max_copies)?;
    let (t, degraded) = sweep_table(a, s)?;
    Ok(Emitted { text: t.render(cli.format.unwrap_or(Format::Csv))?, degraded })
}

/// The random study as a table, plus the number of trials left out
/// because they failed or did not solve to optimality.
pub fn random_table(a: &RandomArgs, seed: u64, s: &SolverSettings) -> Result<(Table, usize)> {
    let spec = RandomModelSpec { dim: a.dim, rank: a.rank.unwrap_or(a.dim), n_params: a.n_params, trials: a.trials, seed };
    spec.validate()?;
    match a.study {
        Study::Gap => {
            if a.n_params != 2 {
                bail!("the gap study compares against the Nagaoka bound and needs --n-params 2");
            }
            let rows: Vec<Option<Vec<Cell>>> = (0..a.trials)
                .into_par_iter()
                .map(|t| match random_gap_row(&spec, t, s) {
                    Ok(r) if r.status == Status::Optimal => Some(vec![
                        Cell::Int(r.trial),
                        Cell::Int(r.d),
                        Cell::Num(r.ncrb),
                        Cell::Num(r.hcrb),
                        Cell::Num(r.rel_gap),
                    ]),
                    _ => None,
                })
                .collect();
            let skipped = rows.iter().filter(|r| r.is_none()).count();
            let headers = ["trial", "d", "ncrb", "hcrb", "rel_gap"].map(String::from).to_vec();
            Ok((Table { headers, rows: rows.into_iter().flatten().collect() }, skipped))
        }
        Study::Persistence => {
            let rows: Vec<Option<Vec<Cell>>> = (0..a.trials)
                .into_par_iter()
                .map(|t| {
                    persistence_row(&spec, t, a.copies, s).ok().map(|r| {
                        vec![
                            Cell::Int(r.trial),
                            Cell::Int(r.d),
                            Cell::Int(r.r),
                            Cell::Int(r.n),
                            Cell::Num(r.gap1_half),
                            Cell::Num(r.gap2),
                            Cell::Text(r.status1.as_str().into()),
                            Cell::Text(r.status2.as_str().into()),
                        ]
                    })
                })
                .collect();
            let skipped = rows.iter().filter(|r| r.is_none()).count();
            let headers = ["trial", "d", "r", "n", "gap1_half", "gap2", "status1", "status2"].map(String::from).to_vec();
            Ok((Table { headers, rows: rows.into_iter().flatten().collect() }, skipped))
        }
    }
}

fn cmd_random(cli: &Cli, a: &RandomArgs, s: &SolverSettings) -> Result<Emitted> {
    if a.study == Study::Persistence {
        check_copies(a.copies, cli.max_copies)?;
    }
    let (t, skipped) = random_table(a, cli.seed, s)?;
    if skipped > 0 {
        eprintln!("warning: {skipped} of {} trials skipped", a.trials);
    }
    Ok(Emitted { text: t.render(cli.format.unwrap_or(Format::Csv))?, degraded: skipped > 0 })
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs, s: &SolverSettings) -> Result<Emitted> {
    if let Some(bad) = a.only.iter().find(|&&i| i == 0 || i > verify::TITLES.len()) {
        bail!("no criterion {bad} (criteria are 1..={})", verify::TITLES.len());
    }
    let opts = verify::Options { level: a.level, only: a.only.clone(), perturb: a.perturb, settings: s.clone() };
    let live = cli.format.is_none() && cli.out.is_none();
    let outcomes = verify::run(&opts, |o| {
        if live {
            println!("{}", o.line());
        }
    });
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let text = match cli.format {
        _ if live => format!("{} of {} criteria passed\n", outcomes.len() - failed, outcomes.len()),
        Some(Format::Json) => serde_json::to_string_pretty(&outcomes)? + "\n",
        Some(Format::Csv) => Table {
            headers: ["id", "title", "passed", "detail", "seconds"].map(String::from).to_vec(),
            rows: outcomes
                .iter()
                .map(|o| {
                    vec![
                        Cell::Int(o.id),
                        Cell::Text(o.title.into()),
                        Cell::Text(o.passed.to_string()),
                        Cell::Text(o.detail.clone()),
                        Cell::Num(o.seconds),
                    ]
                })
                .collect(),
        }
        .to_csv()?,
        None => outcomes.iter().map(|o| o.line() + "\n").collect(),
    };
    Ok(Emitted { text, degraded: failed > 0 })
}

fn cmd_export(cli: &Cli, a: &ExportArgs) -> Result<Emitted> {
    if a.list {
        let text = match cli.format {
            Some(Format::Json) => {
                let v: Vec<Value> = catalog::entries()
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "name": e.name,
                            "params": e.params.iter().map(|p| serde_json::json!({"name": p.name, "default": p.default})).collect::<Vec<_>>(),
                            "domain": e.domain,
                            "oracles": e.oracles.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                serde_json::to_string_pretty(&v)? + "\n"
            }
            _ => catalog::entries()
                .iter()
                .map(|e| {
                    let ps: Vec<String> = e.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
                    format!("{:<22} {:<40} {}\n", e.name, ps.join(" "), e.domain)
                })
                .collect(),
        };
        return Ok(Emitted { text, degraded: false });
    }
    if cli.format == Some(Format::Csv) {
        bail!("model files are JSON only");
    }
    check_copies(a.copies, cli.max_copies)?;
    let m = tensor_power_model(&load_model(&a.source)?, a.copies)?;
    Ok(Emitted { text: model_to_string(&m) + "\n", degraded: false })
}
