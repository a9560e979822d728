//! Command-line front end.
//!
//! Subcommands print one line per check and optionally write a JSON report
//! (`spinform.report/v1`). Exit codes: 0 when every check passes, 1 when a
//! residual check fails, 2 for unusable input.
//!
//! Sample points come from ChaCha8 seeded with `seed_from_u64(seed)`:
//! rejection sampling in the chart's ball, then uniform draws on the
//! interval coordinates (the radius on cones), in that order per point.
//! `SPINFORM_WORKERS` sets the size of the worker pool.

pub mod json;
pub mod scene;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Expect, ResidualReport};
use crate::models::ModelSpec;
pub use scene::{Scene, SCENE_SCHEMA};
pub use suites::{DimensionRow, RunOptions};

pub const REPORT_SCHEMA: &str = "spinform.report/v1";
pub const WORKERS_ENV: &str = "SPINFORM_WORKERS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_SEED: u64 = 0;
const DEFAULT_IDENTITY_SAMPLES: usize = 20;
const DEFAULT_FIELD_SAMPLES: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "spinform", version, about = "Residual checks for spinor-valued forms, Killing equations and metric cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for sample points and random test data.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample points or random trials.
    #[arg(long)]
    samples: Option<usize>,
    /// Override every tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Algebraic identity suite over all signatures up to `--n-max`.
    Identities {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Break one gamma matrix to exercise the failure path.
        #[arg(long)]
        inject_sign_error: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check fields of a scene against Killing-type equations.
    CheckField {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check cone lifts of the fields of a scene.
    ConeCheck {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension table of spinor-valued forms and their derivatives.
    Dimensions {
        #[arg(long)]
        n: usize,
        /// A single degree; all degrees when omitted.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// A complete run: environment echo, checks and overall verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<DimensionRow>,
    pub checks: Vec<ResidualReport>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, opts: RunOptions, model: Option<ModelSpec>, checks: Vec<ResidualReport>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            seed: opts.seed,
            samples: opts.samples,
            tol: opts.tol,
            model,
            table: Vec::new(),
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        json::to_string(&value)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn options(common: &Common, scene: Option<&Scene>, default_samples: usize) -> Result<RunOptions> {
    let tol = common.tol.or(scene.and_then(|s| s.tol));
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Validation(format!("tolerance must be positive, got {t}")));
        }
    }
    let samples = common.samples.or(scene.and_then(|s| s.samples)).unwrap_or(default_samples);
    if samples == 0 {
        return Err(Error::Validation("sample count must be positive".into()));
    }
    Ok(RunOptions {
        seed: common.seed.or(scene.and_then(|s| s.seed)).unwrap_or(DEFAULT_SEED),
        samples,
        tol,
    })
}

pub fn identities(n_max: usize, inject_sign_error: bool, opts: RunOptions) -> Result<Report> {
    let checks = suites::run_identities(n_max, inject_sign_error, opts)?;
    Ok(Report::new("identities", opts, None, checks))
}

pub fn check_field(scene: &Scene, opts: RunOptions) -> Result<Report> {
    let checks = suites::check_field(scene, opts)?;
    Ok(Report::new("check-field", opts, Some(scene.model.clone()), checks))
}

pub fn cone_check(scene: &Scene, opts: RunOptions) -> Result<Report> {
    let checks = suites::cone_check(scene, opts)?;
    Ok(Report::new("cone-check", opts, Some(scene.model.clone()), checks))
}

pub fn dimensions(n: usize, p: Option<usize>) -> Result<Report> {
    let degrees: Vec<usize> = match p {
        Some(p) => vec![p],
        None => (0..=n).collect(),
    };
    let rows = degrees
        .into_iter()
        .map(|p| suites::dimension_row(n, p))
        .collect::<Result<Vec<_>>>()?;
    let checks = rows.iter().flat_map(suites::dimension_checks).collect();
    let opts = RunOptions {
        seed: DEFAULT_SEED,
        samples: 0,
        tol: None,
    };
    let mut report = Report::new("dimensions", opts, None, checks);
    report.table = rows;
    Ok(report)
}

fn check_line(c: &ResidualReport) -> String {
    let verdict = if c.pass { "PASS" } else { "FAIL" };
    let expect = match c.expect {
        Expect::Zero => "<",
        Expect::Nonzero => ">",
    };
    let mut line = format!(
        "{verdict} {:<16} {:<36} max={:.3e} mean={:.3e} {expect} {:.0e} ({} pts",
        c.tag,
        c.subject,
        c.max,
        c.mean,
        c.tol,
        c.residuals.len()
    );
    if c.skipped > 0 {
        line.push_str(&format!(", {} skipped", c.skipped));
    }
    line.push(')');
    line
}

fn row_lines(row: &DimensionRow) -> Vec<String> {
    let mut out = vec![format!(
        "n={} p={}: dim Δ = {}, dim Σ^{} = {}, dim PΣ^q (q = 0..) = {:?}{}",
        row.n,
        row.p,
        row.spinor_dim,
        row.p,
        row.dim_sigma,
        row.primitive_dims,
        if row.primitive_dims_computed { "" } else { " [formula]" }
    )];
    let label = if row.p == 0 || row.p == row.n { "ker prj₃" } else { "twistor rank" };
    let computed = row
        .twistor_rank
        .map(|r| r.to_string())
        .unwrap_or_else(|| "not computed".into());
    let mut line = format!("  {label}: computed {computed}, formula {}", row.twistor_rank_formula);
    if let Some(d) = row.twistor_rank_doubled_formula {
        line.push_str(&format!(", with 2·dim Δ {d}"));
    }
    out.push(line);
    out.push(format!("  {}", row.reconciliation));
    out
}

fn print_report(report: &Report, out: &mut impl Write) -> std::io::Result<()> {
    for row in &report.table {
        for line in row_lines(row) {
            writeln!(out, "{line}")?;
        }
    }
    for c in &report.checks {
        writeln!(out, "{}", check_line(c))?;
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    writeln!(
        out,
        "{}: {passed}/{} checks passed",
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len()
    )
}

fn write_json(report: &Report, path: &Path) -> Result<()> {
    let text = report.to_json();
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("{WORKERS_ENV} must be a positive integer, got `{value}`")))?;
    if workers == 0 {
        return Err(Error::Validation(format!("{WORKERS_ENV} must be positive")));
    }
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

fn execute(command: Command) -> Result<(Report, Option<PathBuf>)> {
    configure_workers()?;
    match command {
        Command::Identities {
            n_max,
            inject_sign_error,
            common,
        } => {
            let opts = options(&common, None, DEFAULT_IDENTITY_SAMPLES)?;
            Ok((identities(n_max, inject_sign_error, opts)?, common.json))
        }
        Command::CheckField { scene, common } => {
            let scene = Scene::load(&scene)?;
            let opts = options(&common, Some(&scene), DEFAULT_FIELD_SAMPLES)?;
            Ok((check_field(&scene, opts)?, common.json))
        }
        Command::ConeCheck { scene, common } => {
            let scene = Scene::load(&scene)?;
            let opts = options(&common, Some(&scene), DEFAULT_FIELD_SAMPLES)?;
            Ok((cone_check(&scene, opts)?, common.json))
        }
        Command::Dimensions { n, p, json } => Ok((dimensions(n, p)?, json)),
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    let (report, json) = match execute(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let to_stdout = json.as_deref() == Some(Path::new("-"));
    if !to_stdout {
        let stdout = std::io::stdout();
        let _ = print_report(&report, &mut stdout.lock());
    }
    if let Some(path) = json {
        if let Err(e) = write_json(&report, &path) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    report.exit_code()
}
