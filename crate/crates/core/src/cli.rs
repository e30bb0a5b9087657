//! Command-line front end: `fit`, `generate`, `bench` and `eval`.
//!
//! Exit codes: 0 success, 1 bad flags or unknown table code, 2 data or file
//! errors, 3 solver failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, write_csv, CentroidMatrix, DataMatrix, MembershipMatrix};
use crate::datagen::{self, TableSpec};
use crate::error::Error;
use crate::evaluation::{self, adjusted_rand_index, crisp, rand_index, within_ss, HardPartition};
use crate::fcm::FcmConfig;
use crate::harness::{self, BenchRow, MethodConfig};
use crate::hsfc::HsfcConfig;
use crate::result::Method;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "hsfc",
    version,
    about = "Fuzzy clustering by FCM and hyperbolic smoothing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one method with seeded restarts and write the best result as JSON.
    Fit(FitArgs),
    /// Generate one of the simulated tables T1..T16 (or an explicit design).
    Generate(GenerateArgs),
    /// Compare both methods over tables and cluster counts.
    Bench(BenchArgs),
    /// Evaluate a saved result against its data (and optional truth labels).
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Fcm,
    Hsfc,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Whether the CSV files carry a header row.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct FcmArgs {
    /// FCM fuzziness exponent.
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    /// FCM absolute improvement threshold.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = 300)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct HsfcArgs {
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.001)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 0.001)]
    pub tau0: f64,
    #[arg(long, default_value_t = 0.25)]
    pub rho1: f64,
    #[arg(long, default_value_t = 0.25)]
    pub rho2: f64,
    #[arg(long, default_value_t = 0.25)]
    pub rho3: f64,
    #[arg(long = "outer-iters", default_value_t = 10)]
    pub outer_iters: usize,
    #[arg(long = "eps-fixed", default_value_t = true, action = ArgAction::Set)]
    pub eps_fixed: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the JSON result.
    #[arg(long, alias = "out")]
    pub output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub fcm: FcmArgs,
    #[command(flatten)]
    pub hsfc: HsfcArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Table code T1..T16; explicit factor flags override its values.
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Number of clusters for an explicit design.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "equal-card", action = ArgAction::Set)]
    pub equal_card: Option<bool>,
    #[arg(long = "equal-sd", action = ArgAction::Set)]
    pub equal_sd: Option<bool>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data CSV path (default `<table>.csv`).
    #[arg(long, alias = "out")]
    pub output: Option<PathBuf>,
    /// Truth label CSV path (default `<output stem>_labels.csv`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated table codes to regenerate.
    #[arg(long, value_delimiter = ',')]
    pub tables: Vec<String>,
    /// Extra dataset to include, named by its file stem.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Truth labels for `--input`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Results CSV path; a JSON copy is written next to it.
    #[arg(long, alias = "out", default_value = "bench.csv")]
    pub output: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub fcm: FcmArgs,
    #[command(flatten)]
    pub hsfc: HsfcArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Result JSON written by `fit`.
    #[arg(long)]
    pub result: PathBuf,
    /// Data CSV the result was fitted on.
    #[arg(long)]
    pub input: PathBuf,
    /// Optional truth labels (single column).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

/// JSON document written by `fit` and read by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub method: Method,
    pub config: serde_json::Value,
    pub best_objective_wp: f64,
    /// Fuzzy objective with exponent `m`, FCM only.
    pub fcm_objective: Option<f64>,
    pub best_seed: u64,
    pub centroids: Vec<Vec<f64>>,
    pub memberships: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub restart_seeds: Vec<u64>,
    pub restart_objectives_wp: Vec<Option<f64>>,
    pub wall_ms: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct BenchReport<'a> {
    schema_version: u32,
    restarts: usize,
    seed: u64,
    fcm: &'a FcmConfig,
    hsfc: &'a HsfcConfig,
    rows: &'a [BenchRow],
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidConfig(_) | Error::UnknownTable(_) => CliError::Usage(msg),
            Error::EmptyCluster { .. }
            | Error::RootNotConverged { .. }
            | Error::AllRestartsFailed(..) => CliError::Solver(msg),
            _ => CliError::Data(msg),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
    }
}

fn fcm_config(k: usize, a: &FcmArgs) -> Result<FcmConfig, CliError> {
    let cfg = FcmConfig {
        k,
        m: a.m,
        tol: a.tol,
        max_iter: a.max_iters,
        seed: 0,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn hsfc_config(k: usize, a: &HsfcArgs) -> Result<HsfcConfig, CliError> {
    let cfg = HsfcConfig {
        k,
        epsilon: a.eps,
        gamma0: a.gamma0,
        tau0: a.tau0,
        rho1: a.rho1,
        rho2: a.rho2,
        rho3: a.rho3,
        outer_iters: a.outer_iters,
        epsilon_fixed: a.eps_fixed,
        seed: 0,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check_restarts(restarts: usize) -> Result<(), CliError> {
    if restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Data(e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let [k] = a.k[..] else {
        return Err(CliError::Usage("fit takes exactly one --k value".into()));
    };
    check_restarts(a.restarts)?;
    let cfg = match a.method {
        MethodArg::Fcm => MethodConfig::Fcm(fcm_config(k, &a.fcm)?),
        MethodArg::Hsfc => MethodConfig::Hsfc(hsfc_config(k, &a.hsfc)?),
    };
    let x = load_csv(&a.input, a.csv.header, a.csv.delimiter)?;
    if k > x.n() {
        return Err(CliError::Usage(format!(
            "--k {k} exceeds the {} objects in the input",
            x.n()
        )));
    }

    let started = Instant::now();
    let best = harness::run_restarts(&x, &cfg, a.restarts, a.seed)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let config = match &cfg {
        MethodConfig::Fcm(c) => serde_json::to_value(c),
        MethodConfig::Hsfc(c) => serde_json::to_value(c),
    }
    .map_err(|e| CliError::Data(e.to_string()))?;
    let report = FitReport {
        schema_version: SCHEMA_VERSION,
        method: cfg.method(),
        config,
        best_objective_wp: best.best_wp,
        fcm_objective: (cfg.method() == Method::Fcm).then_some(best.best.objective),
        best_seed: best.best.seed,
        centroids: best.best.centroids.to_rows(),
        memberships: best.best.memberships.to_rows(),
        trace: best.best.objective_trace.clone(),
        restart_seeds: best.restarts.iter().map(|r| r.seed).collect(),
        restart_objectives_wp: best.restarts.iter().map(|r| r.wp).collect(),
        wall_ms,
        warnings: best.best.diagnostics.warnings.clone(),
    };
    if let Some(path) = &a.output {
        write_file(path, to_json(&report)?.as_bytes())?;
    }
    writeln!(out, "method: {}", cfg.method()).map_err(io_err)?;
    if let Some(j) = report.fcm_objective {
        writeln!(out, "fcm objective: {j:.6}").map_err(io_err)?;
    }
    let failed = best.restarts.iter().filter(|r| r.wp.is_none()).count();
    if failed > 0 {
        writeln!(out, "failed restarts: {failed}/{}", a.restarts).map_err(io_err)?;
    }
    writeln!(out, "best W(P): {:.6}", best.best_wp).map_err(io_err)?;
    Ok(())
}

fn table_spec(a: &GenerateArgs) -> Result<(String, TableSpec), CliError> {
    let (name, base) = match &a.table {
        Some(code) => (code.trim().to_uppercase(), datagen::spec_from_code(code)?),
        None => {
            let (Some(n), Some(k)) = (a.n, a.k) else {
                return Err(CliError::Usage("give --table or both --n and --k".into()));
            };
            (
                "table".to_owned(),
                TableSpec {
                    n,
                    k,
                    equal_card: true,
                    equal_sd: true,
                    p: datagen::DEFAULT_P,
                    separation: datagen::DEFAULT_SEPARATION,
                    seed: 0,
                },
            )
        }
    };
    let spec = TableSpec {
        n: a.n.unwrap_or(base.n),
        k: a.k.unwrap_or(base.k),
        equal_card: a.equal_card.unwrap_or(base.equal_card),
        equal_sd: a.equal_sd.unwrap_or(base.equal_sd),
        p: a.p.unwrap_or(base.p),
        separation: a.separation.unwrap_or(base.separation),
        seed: a.seed,
    };
    spec.validate()?;
    Ok((name, spec))
}

fn labels_path_for(data: &Path) -> PathBuf {
    let stem = data.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    data.with_file_name(format!("{stem}_labels.csv"))
}

fn with_feature_names(x: DataMatrix) -> crate::error::Result<DataMatrix> {
    let names = (1..=x.p()).map(|j| format!("x{j}")).collect();
    x.with_feature_names(names)
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (name, spec) = table_spec(a)?;
    let (x, truth) = datagen::generate(&spec)?;
    let x = with_feature_names(x)?;
    let data_path = a
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let labels_path = a
        .labels
        .clone()
        .unwrap_or_else(|| labels_path_for(&data_path));
    write_csv(&data_path, &x, a.delimiter)?;
    evaluation::write_labels(&labels_path, &truth)?;
    writeln!(
        out,
        "wrote {} ({}x{}) and {} ({} labels, cardinalities {:?})",
        data_path.display(),
        x.n(),
        x.p(),
        labels_path.display(),
        truth.len(),
        truth.cardinalities()
    )
    .map_err(io_err)?;
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_restarts(a.restarts)?;
    if a.k.is_empty() {
        return Err(CliError::Usage("--k needs at least one value".into()));
    }
    // validate the numeric flags once, before any data work
    for &k in &a.k {
        fcm_config(k, &a.fcm)?;
        hsfc_config(k, &a.hsfc)?;
    }
    let mut datasets: Vec<(String, DataMatrix, Option<HardPartition>)> = Vec::new();
    for code in &a.tables {
        let spec = TableSpec {
            seed: a.seed,
            ..datagen::spec_from_code(code)?
        };
        let (x, truth) = datagen::generate(&spec)?;
        datasets.push((code.trim().to_uppercase(), x, Some(truth)));
    }
    if let Some(path) = &a.input {
        let x = load_csv(path, a.csv.header, a.csv.delimiter)?;
        let truth = a.truth.as_ref().map(evaluation::load_labels).transpose()?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("input")
            .to_owned();
        datasets.push((name, x, truth));
    }
    if datasets.is_empty() {
        return Err(CliError::Usage("give --tables and/or --input".into()));
    }

    let mut rows = Vec::new();
    writeln!(out, "{}", BenchRow::CSV_HEADER).map_err(io_err)?;
    for (name, x, truth) in &datasets {
        for &k in &a.k {
            if k > x.n() {
                return Err(CliError::Usage(format!(
                    "K = {k} exceeds the {} objects of {name}",
                    x.n()
                )));
            }
            let row = harness::compare(
                name,
                x,
                truth.as_ref(),
                &fcm_config(k, &a.fcm)?,
                &hsfc_config(k, &a.hsfc)?,
                a.restarts,
                a.seed,
            )?;
            writeln!(out, "{}", row.to_csv()).map_err(io_err)?;
            rows.push(row);
        }
    }

    let mut csv = String::from(BenchRow::CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    write_file(&a.output, csv.as_bytes())?;
    let fcm = fcm_config(a.k[0], &a.fcm)?;
    let hsfc = hsfc_config(a.k[0], &a.hsfc)?;
    let report = BenchReport {
        schema_version: SCHEMA_VERSION,
        restarts: a.restarts,
        seed: a.seed,
        fcm: &fcm,
        hsfc: &hsfc,
        rows: &rows,
    };
    write_file(
        &a.output.with_extension("json"),
        to_json(&report)?.as_bytes(),
    )?;
    Ok(())
}

/// Parses a `fit` result document.
pub fn read_report(path: &Path) -> Result<FitReport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let report: FitReport = serde_json::from_str(&text)
        .map_err(|e| CliError::from(Error::MalformedResult(e.to_string())))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::MalformedResult(format!(
            "unsupported schema_version {}",
            report.schema_version
        ))
        .into());
    }
    Ok(report)
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = read_report(&a.result)?;
    let malformed = |e: Error| CliError::from(Error::MalformedResult(e.to_string()));
    let g = CentroidMatrix::from_rows(&report.centroids).map_err(malformed)?;
    let u = MembershipMatrix::from_rows(&report.memberships).map_err(malformed)?;
    let x = load_csv(&a.input, a.csv.header, a.csv.delimiter)?;
    let wp = within_ss(&x, &u, &g)?;
    let labels = crisp(&u);
    writeln!(out, "W(P): {wp:.6}").map_err(io_err)?;
    let joined: Vec<String> = labels.labels().iter().map(usize::to_string).collect();
    writeln!(out, "labels: {}", joined.join(",")).map_err(io_err)?;
    if let Some(path) = &a.truth {
        let truth = evaluation::load_labels(path)?;
        writeln!(out, "RI: {:.6}", rand_index(&labels, &truth)?).map_err(io_err)?;
        writeln!(out, "ARI: {:.6}", adjusted_rand_index(&labels, &truth)?).map_err(io_err)?;
    }
    Ok(())
}
