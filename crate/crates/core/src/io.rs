//! Command-line front end: series ingestion, reports and plot data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fit::{error_curve, fit};
use crate::model::{validate_observations, FitReport, Interval, ModelKind, ModelSpec, Norm, Observations};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Samples used for `--error-curve PATH` without an explicit count.
pub const DEFAULT_CURVE_SAMPLES: usize = 200;

/// Parses two-column numeric text (`t`, `T`).
///
/// The delimiter is taken from the first data line: comma, then tab, then
/// whitespace. Lines starting with `#` and blank lines are skipped, and a
/// single non-numeric line before the first data row is read as a header.
pub fn parse_series(text: &str) -> Result<Observations> {
    #[derive(Clone, Copy)]
    enum Delim {
        Comma,
        Tab,
        Space,
    }
    let mut delim = None;
    let mut header_seen = false;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let d = *delim.get_or_insert(if line.contains(',') {
            Delim::Comma
        } else if line.contains('\t') {
            Delim::Tab
        } else {
            Delim::Space
        });
        let fields: Vec<&str> = match d {
            Delim::Comma => line.split(',').map(str::trim).collect(),
            Delim::Tab => line.split('\t').map(str::trim).collect(),
            Delim::Space => line.split_whitespace().collect(),
        };
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => rows.push((v[0], v[1])),
            Ok(v) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 2 columns, found {}", v.len()),
                })
            }
            Err(_) if rows.is_empty() && !header_seen => {
                header_seen = true;
                delim = None;
            }
            Err(e) => {
                let bad = fields.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or(&"");
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("'{bad}': {e}"),
                });
            }
        }
    }
    validate_observations(&rows)
}

/// Reads and parses a series file. An unreadable file is reported as a
/// parse error at line 0.
pub fn read_series(path: &Path) -> Result<Observations> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_series(&text)
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo = lo
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad lower bound '{lo}': {e}"))?;
    let hi = hi
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad upper bound '{hi}': {e}"))?;
    Ok((lo, hi))
}

fn parse_curve(s: &str) -> std::result::Result<(PathBuf, usize), String> {
    if let Some((path, count)) = s.rsplit_once(':') {
        if let Ok(n) = count.parse::<usize>() {
            if path.is_empty() {
                return Err("missing error-curve path".into());
            }
            return Ok((PathBuf::from(path), n));
        }
    }
    Ok((PathBuf::from(s), DEFAULT_CURVE_SAMPLES))
}

/// Fit exponential decay patterns to a two-column time series without
/// initial guesses.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "tacfit", version)]
pub struct RunConfig {
    /// Input series: two numeric columns, time then value.
    #[arg(long)]
    pub input: PathBuf,
    /// Pattern to fit: exp1, exp2 or exp2osc.
    #[arg(long, default_value = "exp1")]
    pub model: ModelKind,
    /// Error norm: l2, or linf (exp1 only).
    #[arg(long, default_value = "l2")]
    pub norm: Norm,
    /// Rate search interval LO:HI (both negative).
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub k_range: Option<(f64, f64)>,
    /// Frequency search interval LO:HI (exp2osc).
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub mu_range: Option<(f64, f64)>,
    /// Default mesh divisions per axis.
    #[arg(long, default_value_t = 10)]
    pub mesh: usize,
    /// Stop tolerance on the located parameters.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Where to write the JSON report (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where to write per-observation residuals as CSV.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
    /// Where to write the sampled error function, PATH[:SAMPLES] (exp1).
    #[arg(long, value_parser = parse_curve)]
    pub error_curve: Option<(PathBuf, usize)>,
    /// Include the optimizer trace in the report.
    #[arg(long)]
    pub trace: bool,
    /// Evaluate mesh points on all cores.
    #[arg(long)]
    pub parallel: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            model: ModelKind::Exp1,
            norm: Norm::L2,
            k_range: None,
            mu_range: None,
            mesh: 10,
            alpha: None,
            report: None,
            residuals: None,
            error_curve: None,
            trace: false,
            parallel: false,
        }
    }

    /// The model specification this configuration asks for.
    pub fn spec(&self) -> Result<ModelSpec> {
        let mut spec = match self.model {
            ModelKind::Exp1 => ModelSpec::exp1(),
            ModelKind::Exp2 => ModelSpec::exp2(),
            ModelKind::Exp2Osc => ModelSpec::exp2_osc(),
        };
        spec.norm = self.norm;
        spec.mesh = self.mesh;
        spec.parallel = self.parallel;
        if let Some((lo, hi)) = self.k_range {
            spec.k_interval = Interval::rates(lo, hi)?;
        }
        if let Some((lo, hi)) = self.mu_range {
            if self.model != ModelKind::Exp2Osc {
                return Err(Error::InvalidConfig("--mu-range applies to exp2osc only".into()));
            }
            spec.mu_interval = Some(Interval::new(lo, hi)?);
        }
        if let Some(alpha) = self.alpha {
            spec.alpha = alpha;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn check_paths(&self) -> Result<()> {
        let mut paths: Vec<&Path> = vec![self.input.as_path()];
        paths.extend(self.report.as_deref());
        paths.extend(self.residuals.as_deref());
        paths.extend(self.error_curve.as_ref().map(|(p, _)| p.as_path()));
        for (i, a) in paths.iter().enumerate() {
            if paths[i + 1..].contains(a) {
                return Err(Error::InvalidConfig(format!("path {} is used twice", a.display())));
            }
        }
        if self.error_curve.is_some() && self.model != ModelKind::Exp1 {
            return Err(Error::InvalidConfig("--error-curve applies to exp1 only".into()));
        }
        if matches!(self.error_curve, Some((_, n)) if n < 2) {
            return Err(Error::InvalidConfig("error curve needs at least two samples".into()));
        }
        Ok(())
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::DuplicateTime { .. }
        | Error::NonFinite { .. }
        | Error::TooFew { .. }
        | Error::InvalidInterval { .. }
        | Error::InvalidConfig(_) => EXIT_INVALID,
        Error::DegenerateTarget(_) => EXIT_DEGENERATE,
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

/// JSON report of a successful fit.
pub fn report_json(report: &FitReport, with_trace: bool) -> Value {
    let kind = report.spec.kind;
    let params: Map<String, Value> = report
        .params
        .named(kind)
        .into_iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    let mut out = Map::new();
    out.insert("status".into(), json!("ok"));
    out.insert("model".into(), json!(kind.name()));
    out.insert("norm".into(), json!(report.spec.norm.name()));
    out.insert("params".into(), Value::Object(params));
    out.insert("rss".into(), json!(report.rss));
    out.insert("mse".into(), json!(report.mse));
    out.insert("n".into(), json!(report.n()));
    out.insert("iterations".into(), json!(report.tac_iterations));
    out.insert("evaluations".into(), json!(report.evaluations));
    out.insert("wall_time_seconds".into(), json!(report.wall_time));
    out.insert("objective".into(), json!(report.objective));
    if let Some(class) = &report.classification {
        out.insert("classification".into(), json!(class));
        out.insert("minimax_radius".into(), json!(report.minimax_radius));
    }
    out.insert("spec".into(), json!(report.spec));
    if with_trace {
        out.insert("trace".into(), json!(report.trace));
    }
    Value::Object(out)
}

/// Machine-readable error object. A degenerate target also carries its
/// classification.
pub fn error_json(err: &Error, spec: Option<&ModelSpec>) -> Value {
    let mut detail = Map::new();
    detail.insert("kind".into(), json!(err.kind()));
    detail.insert("message".into(), json!(err.to_string()));
    if let Error::Parse { line, .. } = err {
        detail.insert("line".into(), json!(line));
    }
    let mut out = Map::new();
    match err {
        Error::DegenerateTarget(class) => {
            out.insert("status".into(), json!("degenerate"));
            if let Some(spec) = spec {
                out.insert("model".into(), json!(spec.kind.name()));
                out.insert("norm".into(), json!(spec.norm.name()));
            }
            out.insert("classification".into(), json!(class));
        }
        _ => {
            out.insert("status".into(), json!("error"));
        }
    }
    out.insert("error".into(), Value::Object(detail));
    Value::Object(out)
}

/// CSV rows `t,T,fitted,residual`.
pub fn residuals_csv(obs: &Observations, report: &FitReport) -> String {
    let mut s = String::from("t,T,fitted,residual\n");
    for i in 0..obs.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            obs.times()[i],
            obs.values()[i],
            report.fitted[i],
            report.residuals[i]
        ));
    }
    s
}

/// CSV rows `k,error`.
pub fn curve_csv(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("k,error\n");
    for (k, e) in curve {
        s.push_str(&format!("{k},{e}\n"));
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialises") + "\n";
    match &cfg.report {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("cannot write report: {e}"))),
    }
}

/// Reads the input, fits, and writes every requested output.
pub fn execute(cfg: &RunConfig) -> Result<FitReport> {
    cfg.check_paths()?;
    let spec = cfg.spec()?;
    let obs = read_series(&cfg.input)?;
    if let Some((path, samples)) = &cfg.error_curve {
        write_file(path, &curve_csv(&error_curve(&obs, &spec, *samples)?))?;
    }
    let report = fit(&obs, &spec)?;
    if let Some(path) = &cfg.residuals {
        write_file(path, &residuals_csv(&obs, &report))?;
    }
    emit(cfg, &report_json(&report, cfg.trace))?;
    Ok(report)
}

/// Runs the CLI and returns its exit status. Failures are reported as a
/// JSON error object in place of the report and summarised on stderr.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(_) => EXIT_OK,
        Err(err) => {
            eprintln!("tacfit: {err}");
            let spec = cfg.spec().ok();
            if let Err(e) = emit(cfg, &error_json(&err, spec.as_ref())) {
                eprintln!("tacfit: {e}");
            }
            exit_code(&err)
        }
    }
}
