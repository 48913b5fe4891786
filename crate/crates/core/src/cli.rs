//! The `zollforms` command line: configuration, geodesic sweeps and reports.

use crate::expansion::{constants_report, ConstantsReport};
use crate::geodesic::{sample_inits, trace_geodesic, trace_geodesic_unchecked, GeodesicInit, DEFAULT_GRID};
use crate::identities::{run_all, Residual, DEFAULT_TOLERANCE};
use crate::jacobi::solve_fundamental;
use crate::normalform::{assemble_from_path, InvariantRecord};
use crate::surface::{MetricKind, MetricModel, MetricSpec};
use crate::{geodesic, Error, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: &str = "zollforms.report/1";
pub const DEFAULT_GEODESICS: usize = 32;
pub const CSV_HEADER: [&str; 11] = [
    "geodesic_id",
    "r0",
    "phi0",
    "theta0",
    "closure_defect",
    "c0",
    "c01",
    "c2",
    "offdiag_max",
    "H_reading_a",
    "H_reading_b",
];
/// Canonical order in which failing checks are named.
pub const CHECK_ORDER: [&str; 7] = [
    "check_cube",
    "check_tau_s",
    "check_quartic",
    "check_4id",
    "check_commutator_reduction",
    "closure",
    "poincare",
];
/// Tolerances on the invariant diagnostics.
pub const C01_TOLERANCE: f64 = 1e-9;
pub const REALITY_TOLERANCE: f64 = 1e-10;
pub const ROUND_C2_TOLERANCE: f64 = 1e-7;
pub const ROUND_C0_SPREAD: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "zollforms", version, about = "Normal-form invariants along closed geodesics of Zoll surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the derived universal constants.
    Constants {
        /// Write the JSON table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the Jacobi-field identities on a sample of geodesics.
    Verify(RunArgs),
    /// Compute the normal-form invariants on a sample of geodesics.
    Invariants {
        #[command(flatten)]
        run: RunArgs,
        /// Write one CSV row per geodesic here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `round`, `zoll:a1,a2,...` or `control:b1,...`.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub geodesics: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn default_metric() -> MetricSpec {
    MetricSpec::Round {}
}
fn default_geodesics() -> usize {
    DEFAULT_GEODESICS
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Validated run configuration; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_metric")]
    pub metric: MetricSpec,
    #[serde(default = "default_geodesics")]
    pub geodesics: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: default_metric(),
            geodesics: DEFAULT_GEODESICS,
            seed: 0,
            grid: DEFAULT_GRID,
            tolerance: DEFAULT_TOLERANCE,
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies command-line overrides on top of an optional config file.
    pub fn resolve(args: &RunArgs, csv: Option<PathBuf>) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(m) = &args.metric {
            cfg.metric = parse_metric(m)?;
        }
        if let Some(g) = args.geodesics {
            cfg.geodesics = g;
        }
        if let Some(n) = args.grid {
            cfg.grid = n;
        }
        if let Some(t) = args.tol {
            cfg.tolerance = t;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        if args.out.is_some() {
            cfg.out = args.out.clone();
        }
        if csv.is_some() {
            cfg.csv = csv;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<MetricModel> {
        if self.geodesics == 0 {
            return Err(Error::Config("geodesics must be at least 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tolerance)));
        }
        geodesic::check_grid(self.grid)?;
        MetricModel::new(self.metric.clone())
    }
}

/// Parses `round`, `zoll:0.1,0.02` or `control:0.3`.
pub fn parse_metric(s: &str) -> Result<MetricSpec> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let coeffs = || -> Result<Vec<f64>> {
        rest.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("metric coefficient {t:?}: {e}"))))
            .collect()
    };
    match kind {
        "round" if rest.is_empty() => Ok(MetricSpec::Round {}),
        "zoll" | "zoll_revolution" => Ok(MetricSpec::ZollRevolution { h_odd_coeffs: coeffs()? }),
        "control" | "revolution_control" => Ok(MetricSpec::RevolutionControl { h_even_coeffs: coeffs()? }),
        _ => Err(Error::Config(format!("unknown metric {s:?}; expected round, zoll:a1,... or control:b1,..."))),
    }
}

/// Process exit status for an error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidMetric(_) | Error::InvalidGrid(_) => 2,
        _ => 3,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub artifact: String,
    pub version: String,
    pub sign_convention: String,
    pub constants_digest: String,
    pub config: RunConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicRecord {
    pub id: usize,
    pub r0: f64,
    pub phi0: f64,
    pub theta0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poincare_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floquet: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub first_failure: Option<String>,
    pub errors: usize,
    pub max_closure_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_normalized_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_poincare_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2_max_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c01_max_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offdiag_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_obstruction_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub header: Header,
    pub geodesics: Vec<GeodesicRecord>,
    pub summary: Summary,
}

/// SHA-256 of the compact JSON with object keys sorted.
pub fn canonical_digest(value: &Value) -> String {
    let text = serde_json::to_string(value).expect("JSON values always serialise");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Report {
    /// The report as a JSON value with its `digest` field filled in.
    pub fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serialises");
        let digest = canonical_digest(&v);
        v["digest"] = Value::String(digest);
        v
    }
}

/// Recomputes the digest of a parsed report and compares it with the stored one.
pub fn check_digest(report: &Value) -> bool {
    let mut v = report.clone();
    let Some(stored) = v.as_object_mut().and_then(|o| o.remove("digest")) else {
        return false;
    };
    stored.as_str() == Some(canonical_digest(&v).as_str())
}

fn header(cfg: &RunConfig, constants: &ConstantsReport) -> Header {
    Header {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        sign_convention: constants.sign_convention.clone(),
        constants_digest: canonical_digest(&serde_json::to_value(constants).expect("constants serialise")),
        config: cfg.clone(),
    }
}

fn base_record(id: usize, metric: &MetricModel, init: &GeodesicInit) -> GeodesicRecord {
    let (r0, phi0, theta0) = init.coordinates(metric);
    GeodesicRecord {
        id,
        r0,
        phi0,
        theta0,
        closure_defect: None,
        poincare_defect: None,
        floquet: None,
        residuals: Vec::new(),
        invariants: None,
        error: None,
    }
}

fn fold_max(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))))
}

fn order_failures(failed: &mut Vec<String>) {
    failed.sort_by_key(|c| CHECK_ORDER.iter().position(|k| k == c).unwrap_or(CHECK_ORDER.len()));
    failed.dedup();
}

/// Runs every identity check over the configured geodesic sample.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Report> {
    let metric = cfg.validate()?;
    let constants = constants_report()?;
    let inits = sample_inits(&metric, cfg.geodesics, cfg.seed)?;
    let records: Vec<GeodesicRecord> = inits
        .par_iter()
        .enumerate()
        .map(|(id, init)| {
            let mut rec = base_record(id, &metric, init);
            let run = |rec: &mut GeodesicRecord| -> Result<()> {
                let path = trace_geodesic_unchecked(&metric, init, cfg.grid)?;
                rec.closure_defect = Some(path.closure_defect());
                let frame = solve_fundamental(&path)?;
                rec.poincare_defect = Some(frame.poincare_defect());
                rec.floquet = frame.floquet;
                rec.residuals = run_all(&path, &frame)?;
                Ok(())
            };
            if let Err(e) = run(&mut rec) {
                rec.error = Some(e.to_string());
            }
            rec
        })
        .collect();

    let mut failed = Vec::new();
    for r in &records {
        for res in &r.residuals {
            if !res.passed(cfg.tolerance) {
                failed.push(res.check.clone());
            }
        }
        if r.closure_defect.is_some_and(|d| d > cfg.tolerance) {
            failed.push("closure".into());
        }
        if r.poincare_defect.is_some_and(|d| d > cfg.tolerance) {
            failed.push("poincare".into());
        }
    }
    order_failures(&mut failed);
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    let summary = Summary {
        passed: failed.is_empty() && errors == 0,
        first_failure: failed.first().cloned(),
        failed_checks: failed,
        errors,
        max_closure_defect: fold_max(records.iter().filter_map(|r| r.closure_defect)).unwrap_or(0.0),
        max_normalized_residual: fold_max(records.iter().flat_map(|r| r.residuals.iter().map(|x| x.normalized))),
        max_poincare_defect: fold_max(records.iter().filter_map(|r| r.poincare_defect)),
        ..Summary::default()
    };
    Ok(Report {
        schema: SCHEMA_VERSION.into(),
        command: "verify".into(),
        header: header(cfg, &constants),
        geodesics: records,
        summary,
    })
}

/// Computes the invariant record on every geodesic; per-geodesic failures are recorded.
pub fn cmd_invariants(cfg: &RunConfig) -> Result<Report> {
    let metric = cfg.validate()?;
    let constants = constants_report()?;
    let inits = sample_inits(&metric, cfg.geodesics, cfg.seed)?;
    let outcomes: Vec<(GeodesicRecord, Option<Error>)> = inits
        .par_iter()
        .enumerate()
        .map(|(id, init)| {
            let mut rec = base_record(id, &metric, init);
            let run = |rec: &mut GeodesicRecord| -> Result<()> {
                let path = trace_geodesic(&metric, init, cfg.grid)?;
                rec.closure_defect = Some(path.closure_defect());
                rec.invariants = Some(assemble_from_path(&path)?);
                Ok(())
            };
            let err = run(&mut rec).err();
            if let Some(e) = &err {
                rec.error = Some(e.to_string());
            }
            (rec, err)
        })
        .collect();
    if let Some(e) = outcomes.iter().find_map(|(_, e)| {
        e.as_ref().filter(|e| !matches!(e, Error::FirstObstruction { .. } | Error::NonClosingGeodesic { .. }))
    }) {
        return Err(Error::Integration(format!("invariant sweep aborted: {e}")));
    }
    let records: Vec<GeodesicRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    let inv: Vec<&InvariantRecord> = records.iter().filter_map(|r| r.invariants.as_ref()).collect();
    let c0_min = inv.iter().map(|r| r.c0).fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.min(x))));
    let c0_max = fold_max(inv.iter().map(|r| r.c0));
    let c0_spread = c0_min.zip(c0_max).map(|(a, b)| b - a);
    let mut summary = Summary {
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        max_closure_defect: fold_max(records.iter().filter_map(|r| r.closure_defect)).unwrap_or(0.0),
        c0_min,
        c0_max,
        c0_spread,
        c2_max_abs: fold_max(inv.iter().map(|r| r.c2.abs())),
        c01_max_abs: fold_max(inv.iter().map(|r| r.c01.abs())),
        offdiag_max: fold_max(inv.iter().map(|r| r.offdiag_max)),
        imag_max: fold_max(inv.iter().map(|r| r.imag_max)),
        first_obstruction_max: fold_max(inv.iter().map(|r| r.first_obstruction)),
        ..Summary::default()
    };
    let mut failed = Vec::new();
    let over = |x: Option<f64>, tol: f64| x.is_some_and(|x| x > tol);
    if summary.errors > 0 {
        failed.push("geodesic_errors".to_string());
    }
    if over(summary.first_obstruction_max, cfg.tolerance) {
        failed.push("first_obstruction".into());
    }
    if over(summary.c01_max_abs, C01_TOLERANCE) {
        failed.push("c01".into());
    }
    if over(summary.imag_max, REALITY_TOLERANCE) {
        failed.push("reality".into());
    }
    if over(summary.offdiag_max, cfg.tolerance) {
        failed.push("offdiag".into());
    }
    if metric.kind() == MetricKind::Round {
        if over(summary.c2_max_abs, ROUND_C2_TOLERANCE) {
            failed.push("round_c2".into());
        }
        if over(summary.c0_spread, ROUND_C0_SPREAD) {
            failed.push("round_c0_spread".into());
        }
    }
    summary.passed = failed.is_empty();
    summary.first_failure = failed.first().cloned();
    summary.failed_checks = failed;
    Ok(Report {
        schema: SCHEMA_VERSION.into(),
        command: "invariants".into(),
        header: header(cfg, &constants),
        geodesics: records,
        summary,
    })
}

#[derive(Serialize)]
struct CsvRow {
    geodesic_id: usize,
    r0: f64,
    phi0: f64,
    theta0: f64,
    closure_defect: Option<f64>,
    c0: Option<f64>,
    c01: Option<f64>,
    c2: Option<f64>,
    offdiag_max: Option<f64>,
    #[serde(rename = "H_reading_a")]
    h_reading_a: Option<f64>,
    #[serde(rename = "H_reading_b")]
    h_reading_b: Option<f64>,
}

/// Writes one row per geodesic under [`CSV_HEADER`].
pub fn write_csv(report: &Report, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    for r in &report.geodesics {
        let inv = r.invariants.as_ref();
        out.serialize(CsvRow {
            geodesic_id: r.id,
            r0: r.r0,
            phi0: r.phi0,
            theta0: r.theta0,
            closure_defect: r.closure_defect,
            c0: inv.map(|i| i.c0),
            c01: inv.map(|i| i.c01),
            c2: inv.map(|i| i.c2),
            offdiag_max: inv.map(|i| i.offdiag_max),
            h_reading_a: inv.map(|i| i.h.a),
            h_reading_b: inv.map(|i| i.h.b),
        })
        .map_err(csv_err)?;
    }
    if report.geodesics.is_empty() {
        out.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialise") + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn finish(report: &Report) -> i32 {
    match &report.summary.first_failure {
        None if report.summary.passed => {
            eprintln!("{}: pass ({} geodesics)", report.command, report.geodesics.len());
            0
        }
        first => {
            eprintln!(
                "{}: FAIL, first failing check: {}",
                report.command,
                first.as_deref().unwrap_or("geodesic_errors")
            );
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Constants { out } => {
            let report = constants_report()?;
            print!("{}", report.to_text());
            if let Some(p) = out {
                emit(&serde_json::to_value(&report).expect("constants serialise"), Some(&p))?;
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Verify(args) => {
            let cfg = RunConfig::resolve(&args, None)?;
            let report = cmd_verify(&cfg)?;
            emit(&report.to_value(), cfg.out.as_deref())?;
            Ok(finish(&report))
        }
        Command::Invariants { run, csv } => {
            let cfg = RunConfig::resolve(&run, csv)?;
            let report = cmd_invariants(&cfg)?;
            emit(&report.to_value(), cfg.out.as_deref())?;
            if let Some(p) = &cfg.csv {
                write_csv(&report, std::fs::File::create(p)?)?;
            }
            Ok(finish(&report))
        }
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
