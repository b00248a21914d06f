//! The `kinex` command-line front end.
//!
//! Experiments are described by a TOML file with `[simulation]`, `[kernel]`
//! and optional `[output]` tables; flags override file values. Exit codes:
//! 0 = results written (possibly with fit warnings), 1 = configuration or
//! input error, 2 = runtime failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::engine::{InitialWealth, SimulationConfig};
use crate::ensemble::{self, EnsembleSummary, ReplicaStats, SnapshotHistogram};
use crate::error::KinexError;
use crate::kernels::{KernelSpec, ParamDist};
use crate::stats::{self, SummaryOptions, TailFitReport};

/// Points written to `ccdf.csv`.
pub const DEFAULT_CCDF_POINTS: usize = 200;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<KinexError> for CliError {
    fn from(e: KinexError) -> Self {
        match e {
            KinexError::Config(_) | KinexError::Domain { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "kinex", version, about = "Kinetic wealth-exchange simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an ensemble and write result.json, hist.csv and ccdf.csv.
    Simulate {
        /// TOML experiment file, or a result.json whose config is re-run.
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Also write the pooled final wealth to samples.csv.
        #[arg(long)]
        dump_samples: bool,
    },
    /// Run one ensemble per parameter value and write sweep.csv.
    Sweep {
        /// TOML experiment file or result.json.
        config: PathBuf,
        /// xi, f, lambda or param_dist.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Fit a Pareto tail to a CSV of wealth values (one per line).
    Fit {
        /// Wealth values, one per line; a header line is skipped.
        samples: PathBuf,
        #[arg(long, default_value_t = stats::DEFAULT_TAIL_FRACTION)]
        tail_fraction: f64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub tail_fraction: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Interpolation weight of the interpolated kernel.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Saving propensity of the uniform-savings kernel.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Tax rate f of the taxation kernel.
    #[arg(long = "tax-rate")]
    pub f: Option<f64>,
    /// Parameter law of the heterogeneous kernels.
    #[arg(long)]
    pub param_dist: Option<String>,
    /// Experiment id recorded in result.json.
    #[arg(long)]
    pub id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    id: Option<String>,
    simulation: Spanned<SimulationSection>,
    kernel: Spanned<KernelSpec>,
    output: Option<Spanned<OutputOptions>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationSection {
    agents: usize,
    steps: u64,
    #[serde(default)]
    init: InitialWealth,
    #[serde(default)]
    snapshot_at: Vec<u64>,
    #[serde(default = "default_ensemble")]
    ensemble: usize,
    #[serde(default)]
    seed: u64,
}

fn default_ensemble() -> usize {
    crate::engine::DEFAULT_ENSEMBLE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub bins: usize,
    pub tail_fraction: f64,
    pub ccdf_points: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            bins: stats::DEFAULT_BINS,
            tail_fraction: stats::DEFAULT_TAIL_FRACTION,
            ccdf_points: DEFAULT_CCDF_POINTS,
        }
    }
}

impl OutputOptions {
    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions { bins: self.bins, tail_fraction: self.tail_fraction }
    }

    fn validate(&self) -> Result<(), String> {
        if self.bins == 0 {
            return Err("bins must be at least 1".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(format!("tail_fraction = {} is outside (0, 0.5]", self.tail_fraction));
        }
        if self.ccdf_points < 2 {
            return Err("ccdf_points must be at least 2".into());
        }
        Ok(())
    }
}

/// Fully merged configuration of one experiment, echoed into every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub id: String,
    pub simulation: SimulationConfig,
    pub output: OutputOptions,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `span`, falling back to the start of `span`.
fn key_line(text: &str, span: std::ops::Range<usize>, key: &str) -> usize {
    let mut offset = span.start;
    for (k, line) in text[span.start..].split_inclusive('\n').enumerate() {
        let t = line.trim_start();
        // Stop at the next table header.
        if k > 0 && t.starts_with('[') {
            break;
        }
        if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return line_of(text, offset);
            }
        }
        offset += line.len();
    }
    line_of(text, span.start)
}

fn located(text: &str, span: std::ops::Range<usize>, section: &str, e: KinexError) -> CliError {
    let line = match &e {
        KinexError::Domain { name, .. } => key_line(text, span, name),
        _ => line_of(text, span.start),
    };
    CliError::Config(format!("line {line}: [{section}] {e}"))
}

/// Parses and validates an experiment file. Errors carry the line of the
/// offending table or value.
pub fn parse_experiment(text: &str, default_id: &str) -> Result<Experiment, CliError> {
    let file: ExperimentFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;

    let kernel_span = file.kernel.span();
    let sim_span = file.simulation.span();
    let (out_line, output) = match file.output {
        Some(o) => (line_of(text, o.span().start), o.into_inner()),
        None => (0, OutputOptions::default()),
    };
    let kernel = file.kernel.into_inner();
    kernel.validate().map_err(|e| located(text, kernel_span, "kernel", e))?;
    output
        .validate()
        .map_err(|e| CliError::Config(format!("line {out_line}: [output] {e}")))?;

    let s = file.simulation.into_inner();
    let simulation = SimulationConfig {
        agents: s.agents,
        steps: s.steps,
        kernel,
        init: s.init,
        snapshot_at: s.snapshot_at,
        ensemble: s.ensemble,
        seed: s.seed,
    };
    simulation.validate().map_err(|e| located(text, sim_span, "simulation", e))?;
    Ok(Experiment {
        id: file.id.unwrap_or_else(|| default_id.to_string()),
        simulation,
        output,
    })
}

/// Extracts the config echo of a `result.json` record so it can be re-run.
pub fn parse_record_config(text: &str) -> Result<Experiment, CliError> {
    #[derive(Deserialize)]
    struct Echo {
        config: Experiment,
    }
    let exp = serde_json::from_str::<Echo>(text).map_err(|e| CliError::Config(e.to_string()))?.config;
    exp.output.validate().map_err(CliError::Config)?;
    exp.simulation.validate()?;
    Ok(exp)
}

/// Loads a TOML experiment file, or the config echo of a `.json` result
/// record.
pub fn load_experiment(path: &Path) -> Result<Experiment, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|x| x == "json") {
        return parse_record_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    parse_experiment(&text, stem).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn set_kernel_param(kernel: &mut KernelSpec, name: &str, value: &str) -> Result<(), CliError> {
    let number = || {
        value
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("{name} = {value:?} is not a number")))
    };
    match (name, &mut *kernel) {
        ("xi", KernelSpec::Interpolated { xi }) => *xi = number()?,
        ("f", KernelSpec::Taxation { f }) => *f = number()?,
        ("lambda", KernelSpec::UniformSavings { lambda }) => *lambda = number()?,
        (
            "param_dist",
            KernelSpec::RiskAversion { param_dist } | KernelSpec::HeterogeneousSavings { param_dist },
        ) => {
            *param_dist = ParamDist::parse(value.trim())
                .ok_or_else(|| CliError::Config(format!("unknown param_dist {value:?}")))?
        }
        ("xi" | "f" | "lambda" | "param_dist", k) => {
            return Err(CliError::Config(format!("parameter {name} does not apply to kernel {}", k.name())))
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown parameter {name:?} (expected xi, f, lambda or param_dist)"
            )))
        }
    }
    kernel.validate().map_err(CliError::from)
}

/// Applies command-line overrides and re-validates.
pub fn apply_overrides(exp: &mut Experiment, o: &Overrides) -> Result<(), CliError> {
    let sim = &mut exp.simulation;
    if let Some(v) = o.seed {
        sim.seed = v;
    }
    if let Some(v) = o.steps {
        sim.steps = v;
    }
    if let Some(v) = o.agents {
        sim.agents = v;
    }
    if let Some(v) = o.ensemble {
        sim.ensemble = v;
    }
    if let Some(v) = &o.out_dir {
        exp.output.dir = v.clone();
    }
    if let Some(v) = o.tail_fraction {
        exp.output.tail_fraction = v;
    }
    if let Some(v) = o.bins {
        exp.output.bins = v;
    }
    if let Some(v) = &o.id {
        exp.id = v.clone();
    }
    if let Some(v) = o.xi {
        set_kernel_param(&mut sim.kernel, "xi", &v.to_string())?;
    }
    if let Some(v) = o.lambda {
        set_kernel_param(&mut sim.kernel, "lambda", &v.to_string())?;
    }
    if let Some(v) = o.f {
        set_kernel_param(&mut sim.kernel, "f", &v.to_string())?;
    }
    if let Some(v) = &o.param_dist {
        set_kernel_param(&mut sim.kernel, "param_dist", v)?;
    }
    exp.output.validate().map_err(CliError::Config)?;
    sim.validate().map_err(CliError::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFitRecord {
    pub valid: bool,
    pub error: Option<String>,
    pub fit: Option<TailFitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub n_samples: usize,
    /// Mean of per-replica Gini coefficients.
    pub gini: f64,
    pub gini_pooled: f64,
    /// Mode of the pooled histogram.
    pub mode: f64,
    pub mode_replica_mean: f64,
    pub tail_fit: TailFitRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub bin_center: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
}

impl From<&stats::Histogram> for HistogramRecord {
    fn from(h: &stats::Histogram) -> Self {
        Self { bin_center: h.centers(), density: h.density(), counts: h.counts.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub step: u64,
    pub histogram: HistogramRecord,
}

/// Self-describing output of `kinex simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub seed: u64,
    pub config: Experiment,
    pub runtime_seconds: f64,
    pub summary: SummaryRecord,
    pub replicas: Vec<ReplicaStats>,
    pub histogram: HistogramRecord,
    /// `[w, F̂(w)]` at logarithmically spaced `w`.
    pub ccdf: Vec<[f64; 2]>,
    pub snapshots: Vec<SnapshotRecord>,
}

impl ResultRecord {
    pub fn new(exp: &Experiment, s: &EnsembleSummary, runtime_seconds: f64) -> Self {
        let d = &s.distribution;
        let tail_fit = match &d.tail_fit {
            Ok(f) => TailFitRecord { valid: true, error: None, fit: Some(*f) },
            Err(e) => TailFitRecord { valid: false, error: Some(e.to_string()), fit: None },
        };
        Self {
            experiment_id: exp.id.clone(),
            seed: exp.simulation.seed,
            config: exp.clone(),
            runtime_seconds,
            summary: SummaryRecord {
                n_samples: d.n_samples,
                gini: s.gini_mean,
                gini_pooled: d.gini,
                mode: d.mode,
                mode_replica_mean: s.mode_mean,
                tail_fit,
            },
            replicas: s.replicas.clone(),
            histogram: (&d.histogram).into(),
            ccdf: d.ccdf.log_spaced(exp.output.ccdf_points).into_iter().map(|(w, f)| [w, f]).collect(),
            snapshots: s
                .snapshots
                .iter()
                .map(|SnapshotHistogram { step, histogram }| SnapshotRecord { step: *step, histogram: histogram.into() })
                .collect(),
        }
    }
}

pub fn histogram_csv(h: &HistogramRecord) -> String {
    let mut out = String::from("bin_center,density\n");
    for (c, d) in h.bin_center.iter().zip(&h.density) {
        let _ = writeln!(out, "{c},{d}");
    }
    out
}

pub fn ccdf_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("w,F\n");
    for [w, f] in points {
        let _ = writeln!(out, "{w},{f}");
    }
    out
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub gini: f64,
    pub mode: f64,
    pub nu: Option<f64>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,gini,mode,nu\n");
    for r in rows {
        let nu = r.nu.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.value, r.gini, r.mode, nu);
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn run_experiment(exp: &Experiment) -> Result<(EnsembleSummary, f64), CliError> {
    let started = Instant::now();
    let summary = ensemble::run_ensemble_with(
        &exp.simulation,
        &exp.output.summary_options(),
        ensemble::threads_from_env(),
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((summary, started.elapsed().as_secs_f64()))
}

/// Runs the experiment and writes its record and CSV files.
pub fn cmd_simulate(exp: &Experiment, dump_samples: bool) -> Result<ResultRecord, CliError> {
    let (summary, runtime) = run_experiment(exp)?;
    let record = ResultRecord::new(exp, &summary, runtime);
    let dir = &exp.output.dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&dir.join("result.json"), &json)?;
    write_file(&dir.join("hist.csv"), &histogram_csv(&record.histogram))?;
    write_file(&dir.join("ccdf.csv"), &ccdf_csv(&record.ccdf))?;
    if dump_samples {
        let mut out = String::with_capacity(summary.pooled.len() * 20);
        for w in &summary.pooled {
            let _ = writeln!(out, "{w}");
        }
        write_file(&dir.join("samples.csv"), &out)?;
    }
    if let Some(e) = &record.summary.tail_fit.error {
        eprintln!("warning: {e}");
    }
    Ok(record)
}

/// Runs one ensemble per value of `param` and writes `sweep.csv`.
pub fn cmd_sweep(exp: &Experiment, param: &str, values: &[String]) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let mut runs = Vec::with_capacity(values.len());
    for v in values {
        let mut e = exp.clone();
        set_kernel_param(&mut e.simulation.kernel, param, v)?;
        runs.push((v.trim().to_string(), e));
    }
    let mut rows = Vec::with_capacity(runs.len());
    for (value, e) in &runs {
        let (s, _) = run_experiment(e)?;
        rows.push(SweepRow { value: value.clone(), gini: s.gini_mean, mode: s.mode(), nu: s.nu() });
    }
    let dir = &exp.output.dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_file(&dir.join("sweep.csv"), &sweep_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub n_samples: usize,
    pub tail_fraction: f64,
    pub nu: f64,
    pub regression: stats::TailFit,
    pub hill: stats::TailFit,
    pub disagreement: f64,
}

/// Reads wealth values, one per line. A non-numeric first line is treated
/// as a header; blank lines are skipped.
pub fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut values = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if k == 0 => {}
            Err(_) => {
                return Err(CliError::Config(format!("{}: line {}: {field:?} is not a number", path.display(), k + 1)))
            }
        }
    }
    Ok(values)
}

pub fn cmd_fit(samples: &[f64], tail_fraction: f64) -> Result<FitRecord, CliError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(CliError::Config(format!("tail_fraction = {tail_fraction} is outside (0, 0.5]")));
    }
    let fit = stats::fit_pareto_tail(samples, tail_fraction).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(FitRecord {
        n_samples: samples.len(),
        tail_fraction,
        nu: fit.nu(),
        regression: fit.regression,
        hill: fit.hill,
        disagreement: fit.disagreement(),
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, overrides, dump_samples } => {
            let mut exp = load_experiment(&config)?;
            apply_overrides(&mut exp, &overrides)?;
            let r = cmd_simulate(&exp, dump_samples)?;
            let nu = r.summary.tail_fit.fit.map(|f| format!("{:.4}", f.nu())).unwrap_or_else(|| "-".into());
            println!(
                "{}: gini={:.4} mode={:.4} nu={} ({} samples, {:.1}s) -> {}",
                r.experiment_id,
                r.summary.gini,
                r.summary.mode,
                nu,
                r.summary.n_samples,
                r.runtime_seconds,
                exp.output.dir.display()
            );
        }
        Command::Sweep { config, param, values, overrides } => {
            let mut exp = load_experiment(&config)?;
            apply_overrides(&mut exp, &overrides)?;
            let rows = cmd_sweep(&exp, &param, &values)?;
            print!("{}", sweep_csv(&rows));
        }
        Command::Fit { samples, tail_fraction, out } => {
            let values = read_samples(&samples)?;
            let record = cmd_fit(&values, tail_fraction)?;
            let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
            match out {
                Some(p) => write_file(&p, &json)?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
