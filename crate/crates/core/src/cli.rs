//! Command-line front end of the `vcluster` binary.
//!
//! Every artifact starts with a header carrying the schema, the crate
//! version and the effective configuration. The worker count and output
//! path are execution details and are left out, so artifacts from runs that
//! differ only in those are byte-identical.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{pfail, AnalyticModel, SURFACE_THRESHOLD};
use crate::error::Error;
use crate::estimators::{
    estimate_connection_stats, estimate_logical_measurement_error, estimate_residual_channel,
    estimate_star_blocks, loglog_slope, CorrelationReport, LeafSource, McConfig, RateEstimate,
    DEFAULT_CONFIDENCE,
};
use crate::protocols::resources::count_resources;
use crate::selftest;
use crate::steane::Basis;

pub const SCHEMA: &str = "vcluster-artifact/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_ZERO_ACCEPTED: i32 = 3;

/// DV trials per star trial in the `star` correlation diagnostic.
pub const STAR_DV_TRIALS_FACTOR: u64 = 1000;

#[derive(Parser, Debug)]
#[command(
    name = "vcluster",
    version,
    about = "Verified logical cluster states: Monte Carlo and analytic model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Residual channel of a double-verified block against the leading-order model.
    Channel,
    /// Logical X readout error against f(p_q0).
    LogicalError,
    /// Fusion success, root failure and conditional readout error.
    Connect,
    /// Full star builds: per-block residuals and wire correlations.
    Star,
    /// Analytic grid of q(p), verdict and resources.
    Sweep,
    /// Resource estimate at one point.
    Resources,
    /// Exhaustive oracle checks.
    Selftest,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Comma-separated physical error rates.
    #[arg(long = "p-grid", global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Leaves per star.
    #[arg(long = "L", global = true)]
    leaves: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Idle time per readout, in units of a gate.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Computation size.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Code family; only `steane` is implemented.
    #[arg(long, global = true)]
    code: Option<String>,
    #[arg(long, global = true)]
    confidence: Option<f64>,
    /// Leaf source for `connect`: star, pair or homogeneous.
    #[arg(long, global = true)]
    source: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long = "threshold-const", global = true)]
    threshold_const: Option<f64>,
    #[arg(long = "kappa-prefactor", global = true)]
    kappa_prefactor: Option<f64>,
}

/// Effective configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub p: Vec<f64>,
    /// `None` in `sweep` picks the `q`-minimising leaf count per point.
    #[serde(rename = "L")]
    pub leaves: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub tau: f64,
    pub omega: f64,
    pub code: String,
    pub confidence: f64,
    pub source: LeafSource,
    pub threshold_const: f64,
    pub kappa_prefactor: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::ZeroAccepted(_)) => EXIT_ZERO_ACCEPTED,
            _ => EXIT_USAGE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

const FILE_KEYS: &[&str] = &[
    "p",
    "p-grid",
    "L",
    "trials",
    "seed",
    "tau",
    "omega",
    "code",
    "confidence",
    "source",
    "out",
    "format",
    "workers",
    "threshold-const",
    "kappa-prefactor",
];

/// Parses a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !FILE_KEYS.contains(&k) {
            return Err(format!("line {}: unknown key {k:?}", n + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("line {}: duplicate key {k:?}", n + 1));
        }
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| usage(format!("config key {key}: cannot parse {v:?}")))
}

impl Flags {
    /// Fills unset flags from a config file.
    fn merge_file(&mut self, file: &BTreeMap<String, String>) -> Result<(), CliError> {
        fn fill<T: std::str::FromStr>(
            slot: &mut Option<T>,
            key: &str,
            file: &BTreeMap<String, String>,
        ) -> Result<(), CliError> {
            if slot.is_none() {
                if let Some(v) = file.get(key) {
                    *slot = Some(parse_value(key, v)?);
                }
            }
            Ok(())
        }
        let p_given = self.p.is_some() || self.p_grid.is_some();
        if !p_given {
            fill(&mut self.p, "p", file)?;
        }
        fill(&mut self.leaves, "L", file)?;
        fill(&mut self.trials, "trials", file)?;
        fill(&mut self.seed, "seed", file)?;
        fill(&mut self.tau, "tau", file)?;
        fill(&mut self.omega, "omega", file)?;
        fill(&mut self.code, "code", file)?;
        fill(&mut self.confidence, "confidence", file)?;
        fill(&mut self.source, "source", file)?;
        fill(&mut self.out, "out", file)?;
        fill(&mut self.workers, "workers", file)?;
        fill(&mut self.threshold_const, "threshold-const", file)?;
        fill(&mut self.kappa_prefactor, "kappa-prefactor", file)?;
        if !p_given {
            if let Some(v) = file.get("p-grid") {
                self.p_grid = Some(
                    v.split(',')
                        .map(|x| parse_value("p-grid", x.trim()))
                        .collect::<Result<_, _>>()?,
                );
            }
        }
        if self.format.is_none() {
            if let Some(v) = file.get("format") {
                self.format = Some(
                    Format::from_str(v, true)
                        .map_err(|_| usage(format!("config key format: {v:?}")))?,
                );
            }
        }
        Ok(())
    }
}

fn default_trials(c: Command) -> u64 {
    match c {
        Command::Channel | Command::LogicalError => 100_000,
        Command::Connect => 2_000,
        Command::Star => 200,
        Command::Sweep | Command::Resources | Command::Selftest => 1,
    }
}

/// Default sweep grid: 0.5% to 2% in steps of 0.25%.
pub fn default_sweep_grid() -> Vec<f64> {
    (0..7).map(|i| (20 + 10 * i) as f64 / 4000.0).collect()
}

impl RunConfig {
    fn resolve(command: Command, f: Flags) -> Result<Self, CliError> {
        let p = match (f.p, f.p_grid) {
            (Some(_), Some(_)) => return Err(usage("give either --p or --p-grid, not both")),
            (Some(p), None) => vec![p],
            (None, Some(g)) => g,
            (None, None) if command == Command::Sweep => default_sweep_grid(),
            (None, None) => vec![0.01],
        };
        let leaves = match (f.leaves, command) {
            (Some(l), _) => Some(l),
            (None, Command::Sweep) => None,
            (None, _) => Some(7),
        };
        let source = match f.source {
            Some(s) => s.parse()?,
            None => LeafSource::Pair,
        };
        let cfg = RunConfig {
            command,
            p,
            leaves,
            trials: f.trials.unwrap_or_else(|| default_trials(command)),
            seed: f.seed.unwrap_or(1),
            tau: f.tau.unwrap_or(0.0),
            omega: f.omega.unwrap_or(1e21),
            code: f.code.unwrap_or_else(|| "steane".into()),
            confidence: f.confidence.unwrap_or(DEFAULT_CONFIDENCE),
            source,
            threshold_const: f.threshold_const.unwrap_or(SURFACE_THRESHOLD),
            kappa_prefactor: f.kappa_prefactor.unwrap_or(1.0),
            format: f.format.unwrap_or(if command == Command::Sweep {
                Format::Csv
            } else {
                Format::Json
            }),
            out: f.out,
            workers: f.workers.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.p.is_empty() {
            return Err(usage("empty p grid"));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(usage(format!("p = {p} outside [0, 1]")));
        }
        if self.leaves == Some(0) {
            return Err(usage("L must be at least 1"));
        }
        if self.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if !(self.tau >= 0.0) {
            return Err(usage("tau must be non-negative"));
        }
        if !(self.omega > 1.0) {
            return Err(usage("omega must exceed 1"));
        }
        if self.code != "steane" {
            return Err(usage(format!(
                "code {:?} is not implemented; only steane is",
                self.code
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(usage("confidence must lie in (0, 1)"));
        }
        if !(self.threshold_const > 0.0) || !(self.kappa_prefactor > 0.0) {
            return Err(usage(
                "threshold-const and kappa-prefactor must be positive",
            ));
        }
        Ok(())
    }

    fn mc(&self) -> McConfig {
        McConfig::new(self.trials, self.seed)
            .with_confidence(self.confidence)
            .with_workers(self.workers)
    }

    fn model(&self) -> AnalyticModel<f64> {
        AnalyticModel {
            threshold: self.threshold_const,
            kappa_prefactor: self.kappa_prefactor,
            ..Default::default()
        }
    }

    fn leaves(&self) -> usize {
        self.leaves.unwrap_or(7)
    }
}

/// A run's results in both output shapes.
struct Report {
    json: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    passed: bool,
}

impl Report {
    fn new(json: Value, columns: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Self {
            json,
            columns,
            rows,
            passed: true,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn rate_cells(r: &RateEstimate) -> [String; 3] {
    [num(r.point), num(r.ci_low), num(r.ci_high)]
}

fn channel(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = cfg.model();
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &p in &cfg.p {
        let est = estimate_residual_channel(p, &cfg.mc())?;
        let lead = model.leading_channel(p);
        let corr = CorrelationReport::from_channel(&est)?;
        let mut row = vec![
            num(p),
            est.acceptance.trials.to_string(),
            est.acceptance.successes.to_string(),
            num(est.acceptance.point),
        ];
        for r in [&est.pooled.x, &est.pooled.y, &est.pooled.z] {
            row.extend(rate_cells(r));
        }
        row.extend([
            num(lead.eps_x),
            num(lead.eps_y),
            num(lead.eps_z),
            corr.all_within_bound().to_string(),
        ]);
        rows.push(row);
        results.push(json!({ "estimate": est, "model": lead, "correlation": corr }));
    }
    let columns = vec![
        "p",
        "trials",
        "accepted",
        "acceptance",
        "eps_x",
        "eps_x_low",
        "eps_x_high",
        "eps_y",
        "eps_y_low",
        "eps_y_high",
        "eps_z",
        "eps_z_low",
        "eps_z_high",
        "model_x",
        "model_y",
        "model_z",
        "correlation_within_bound",
    ];
    Ok(Report::new(json!({ "points": results }), columns, rows))
}

fn logical_error(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = cfg.model();
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &p in &cfg.p {
        let est = estimate_logical_measurement_error(p, cfg.tau, Basis::X, &cfg.mc())?;
        let (q0, q1) = (
            model.pq0(p, Basis::X, cfg.tau),
            model.pq1(p, Basis::X, cfg.tau),
        );
        let mut row = vec![num(p), num(cfg.tau), est.error.trials.to_string()];
        row.extend(rate_cells(&est.error));
        row.extend([num(q0), num(q1)]);
        rows.push(row);
        points.push((p, est.error));
        results.push(json!({ "estimate": est, "model_p_q0": q0, "model_p_q1": q1 }));
    }
    let slope = loglog_slope(&points);
    let columns = vec![
        "p",
        "tau",
        "accepted",
        "error",
        "error_low",
        "error_high",
        "model_p_q0",
        "model_p_q1",
    ];
    Ok(Report::new(
        json!({ "points": results, "slope": slope }),
        columns,
        rows,
    ))
}

fn connect(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = cfg.model();
    let l = cfg.leaves();
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &p in &cfg.p {
        let est = estimate_connection_stats(p, l, cfg.source, &cfg.mc())?;
        let ps = model.ps(p);
        let pf = pfail(l, ps)?;
        let q1 = model.pq1(p, Basis::X, cfg.tau);
        let mut row = vec![
            num(p),
            l.to_string(),
            json!(cfg.source).as_str().unwrap_or_default().to_string(),
        ];
        row.extend(rate_cells(&est.fusion.p_s));
        row.push(num(ps));
        row.extend(rate_cells(&est.roots.p_fail));
        row.push(num(pf));
        row.extend(rate_cells(&est.fusion.conditional_error));
        row.extend([
            num(est.fusion.inherited_error.point),
            num(q1),
            num(est.roots.mean_attempts()),
        ]);
        rows.push(row);
        results.push(json!({
            "estimate": est,
            "model_p_s": ps,
            "model_p_fail": pf,
            "model_p_q1": q1,
            "mean_attempts": est.roots.mean_attempts(),
        }));
    }
    let columns = vec![
        "p",
        "L",
        "source",
        "p_s",
        "p_s_low",
        "p_s_high",
        "model_p_s",
        "p_fail",
        "p_fail_low",
        "p_fail_high",
        "model_p_fail",
        "conditional_error",
        "conditional_low",
        "conditional_high",
        "inherited_error",
        "model_p_q1",
        "mean_attempts",
    ];
    Ok(Report::new(json!({ "points": results }), columns, rows))
}

fn star(cfg: &RunConfig) -> Result<Report, CliError> {
    let l = cfg.leaves();
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let dv = McConfig {
        trials: cfg.trials.saturating_mul(STAR_DV_TRIALS_FACTOR),
        ..cfg.mc()
    };
    for &p in &cfg.p {
        let est = estimate_star_blocks(p, l, &cfg.mc())?;
        let corr = CorrelationReport::from_channel(&estimate_residual_channel(p, &dv)?)?;
        for (v, (x, z)) in est.x_error.iter().zip(&est.z_error).enumerate() {
            let role = match v {
                0 => "root",
                v if v % 2 == 1 => "inner",
                _ => "end",
            };
            let mut row = vec![num(p), l.to_string(), v.to_string(), role.to_string()];
            row.extend(rate_cells(x));
            row.extend(rate_cells(z));
            rows.push(row);
        }
        let (dv_a, pair_a, star_a) = est.attempts_per_star();
        results.push(json!({
            "estimate": est,
            "attempts_per_star": { "dv": dv_a, "pair": pair_a, "star": star_a },
            "leaves_homogeneous": est.leaves_homogeneous(),
            "dv_trials": dv.trials,
            "correlation": corr,
            "correlation_within_bound": corr.all_within_bound(),
        }));
    }
    let columns = vec![
        "p", "L", "block", "role", "x_error", "x_low", "x_high", "z_error", "z_low", "z_high",
    ];
    Ok(Report::new(json!({ "points": results }), columns, rows))
}

const SWEEP_COLUMNS: [&str; 15] = [
    "p", "L", "tau", "p_q0", "p_q1", "p_s", "p_fail", "q", "verdict", "kappa", "R", "N", "K", "C",
    "CR",
];

/// One analytic grid point; resource cells stay empty where `kappa` is undefined.
fn sweep_point(cfg: &RunConfig, p: f64) -> Result<(Value, Vec<String>), CliError> {
    let model = cfg.model();
    let l = match cfg.leaves {
        Some(l) => l,
        None => model.choose_leaves(p, 1e-3)?.q_minimizing,
    };
    let t = model.q_of_p(p, l, cfg.tau)?;
    let count = count_resources(l, p)?;
    let est = model
        .resources(p, t.q, cfg.omega, count.n, count.k as f64)
        .ok();
    let mut row = vec![
        num(p),
        l.to_string(),
        num(cfg.tau),
        num(t.p_q0),
        num(t.p_q1),
        num(t.p_s),
        num(t.p_fail),
        num(t.q),
    ];
    row.push(t.verdict.to_string());
    match &est {
        Some(e) => row.extend([
            num(e.kappa),
            num(e.r),
            num(e.n),
            num(e.k),
            num(e.c),
            num(e.cr),
        ]),
        None => row.extend([
            String::new(),
            String::new(),
            num(count.n),
            count.k.to_string(),
            String::new(),
            String::new(),
        ]),
    }
    let k_eff = model
        .resources(p, t.q, cfg.omega, count.n, count.k_effective)
        .ok();
    Ok((
        json!({ "threshold": t, "count": count, "estimate": est, "estimate_k_effective": k_eff }),
        row,
    ))
}

fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let (json, rows): (Vec<_>, Vec<_>) = cfg
        .p
        .iter()
        .map(|&p| sweep_point(cfg, p))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .unzip();
    Ok(Report::new(
        json!({ "points": json }),
        SWEEP_COLUMNS.to_vec(),
        rows,
    ))
}

fn selftest(cfg: &RunConfig) -> Result<Report, CliError> {
    let checks = selftest::run_all(cfg.seed, cfg.leaves())?;
    let rows = checks
        .iter()
        .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()])
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    let mut r = Report::new(
        json!({ "checks": checks, "passed": passed }),
        vec!["check", "passed", "detail"],
        rows,
    );
    r.passed = passed;
    Ok(r)
}

fn render(cfg: &RunConfig, report: &Report) -> Result<Vec<u8>, CliError> {
    let version = env!("CARGO_PKG_VERSION");
    match cfg.format {
        Format::Json => {
            let doc = json!({ "schema": SCHEMA, "version": version, "config": cfg, "results": report.json });
            let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| usage(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = format!("# schema = {SCHEMA}\n# version = {version}\n");
            if let Value::Object(m) = json!(cfg) {
                for (k, v) in m {
                    let v = match v {
                        Value::String(s) => s,
                        Value::Array(a) => a
                            .iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                        v => v.to_string(),
                    };
                    out.push_str(&format!("# {k} = {v}\n"));
                }
            }
            let mut w = csv::Writer::from_writer(out.into_bytes());
            w.write_record(&report.columns)
                .map_err(|e| usage(e.to_string()))?;
            for row in &report.rows {
                w.write_record(row).map_err(|e| usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| usage(e.to_string()))
        }
    }
}

fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let report = match cfg.command {
        Command::Channel => channel(cfg)?,
        Command::LogicalError => logical_error(cfg)?,
        Command::Connect => connect(cfg)?,
        Command::Star => star(cfg)?,
        Command::Sweep | Command::Resources => sweep(cfg)?,
        Command::Selftest => selftest(cfg)?,
    };
    let bytes = render(cfg, &report)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    Ok(report.passed)
}

/// Parses arguments (a config file is read if `--config` is given).
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut flags = cli.flags;
    let resolved = (|| {
        if let Some(path) = flags.config.clone() {
            flags.merge_file(&read_config(&path)?)?;
        }
        RunConfig::resolve(cli.command, flags)
    })();
    resolved
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_config_file(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cfg, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "error: one or more checks failed");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
