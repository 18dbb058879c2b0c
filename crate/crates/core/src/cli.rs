//! Command-line front end. [`run`] is what the `mcc-infer` binary calls.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mcc::CountsTable4;
use crate::paired::{ci_paired, CountsTable8};
use crate::scenario::{paired_scenario_with, single_scenario, ClassifierSummary, Scenario};
use crate::sim::{run_coverage, write_coverage_csv, SimConfig, CSV_SCHEMA_VERSION};
use crate::single::{ci_single, ConfidenceInterval, Method};
use crate::sweep::{run_sweep, write_sweep_csv, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ALL_NA: i32 = 2;

const SINGLE_ORDER: &str =
    "Counts are TP FP FN TN: (prediction 1, truth 1), (prediction 1, truth 0), \
(prediction 0, truth 1), (prediction 0, truth 0).";

const PAIRED_ORDER: &str =
    "Counts are n111 n110 n101 n100 n011 n010 n001 n000, where n_ijk counts items \
with h1 prediction i, h2 prediction j and truth k.";

#[derive(Debug, Parser)]
#[command(
    name = "mcc-infer",
    version,
    about = "Confidence intervals for the Matthews correlation coefficient",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interval for the MCC of one classifier.
    #[command(after_help = SINGLE_ORDER)]
    CiSingle(CiSingleArgs),
    /// Interval for MCC(h1) - MCC(h2) on a shared sample.
    #[command(after_help = PAIRED_ORDER)]
    CiPaired(CiPairedArgs),
    /// Monte Carlo coverage of the interval methods.
    Simulate(SimulateArgs),
    /// Sweep the unidentified joint cells of a paired comparison rebuilt from
    /// sensitivity and specificity.
    Sweep(SweepArgs),
    /// Resolve a scenario and print it in the key-value file format.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write CSV to this path (`-` for standard output).
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SingleMethodArg {
    Simple,
    Fisher,
    FisherNaive,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairedMethodArg {
    Simple,
    Zou,
    Mt,
    All,
}

#[derive(Debug, Args)]
struct CiSingleArgs {
    /// TP FP FN TN.
    #[arg(num_args = 4, value_names = ["TP", "FP", "FN", "TN"], required_unless_present = "counts_file")]
    counts: Vec<u64>,
    /// Read the four counts from a file (whitespace or comma separated).
    #[arg(long, value_name = "PATH", conflicts_with = "counts")]
    counts_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = SingleMethodArg::All)]
    method: SingleMethodArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct CiPairedArgs {
    /// n111 n110 n101 n100 n011 n010 n001 n000.
    #[arg(
        num_args = 8,
        value_names = ["N111", "N110", "N101", "N100", "N011", "N010", "N001", "N000"],
        required_unless_present = "counts_file"
    )]
    counts: Vec<u64>,
    /// Read the eight counts from a file (whitespace or comma separated).
    #[arg(long, value_name = "PATH", conflicts_with = "counts")]
    counts_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = PairedMethodArg::All)]
    method: PairedMethodArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ScenarioSpec {
    /// Load the scenario from a key-value file written by `scenario`.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["prevalence", "mcc1", "mcc2"])]
    scenario_file: Option<PathBuf>,
    #[arg(long, required_unless_present = "scenario_file")]
    prevalence: Option<f64>,
    #[arg(long, required_unless_present = "scenario_file")]
    mcc1: Option<f64>,
    /// Second classifier's MCC; makes the scenario paired.
    #[arg(long)]
    mcc2: Option<f64>,
    #[arg(long, default_value_t = crate::scenario::DEFAULT_P001, requires = "mcc2")]
    p001: f64,
    #[arg(long, default_value_t = crate::scenario::DEFAULT_P110, requires = "mcc2")]
    p110: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioSpec,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 100_000)]
    m: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, env = "MCC_INFER_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Comma-separated methods; defaults to every method of the scenario kind.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    sens_a: f64,
    #[arg(long)]
    spec_a: f64,
    #[arg(long)]
    sens_b: f64,
    #[arg(long)]
    spec_b: f64,
    #[arg(long)]
    prevalence: f64,
    /// Prevalence of classifier B's evaluation, if reported separately.
    #[arg(long)]
    prevalence_b: Option<f64>,
    #[arg(long, default_value_t = crate::scenario::enhancer_benchmark::SAMPLE_SIZE)]
    n: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0.025)]
    p001_step: f64,
    #[arg(long, default_value_t = 0.001)]
    p110_step: f64,
    #[arg(long, value_enum, default_value_t = PairedMethodArg::Mt)]
    method: PairedMethodArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[command(flatten)]
    scenario: ScenarioSpec,
    /// Write to this path instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// One interval as written by `ci-single` and `ci-paired`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRow {
    pub schema_version: String,
    pub method: String,
    pub n: u64,
    pub level: f64,
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// NA reason, empty when the interval is defined.
    pub na: Option<String>,
}

impl CiRow {
    fn new(ci: &ConfidenceInterval, n: u64) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            schema_version: CSV_SCHEMA_VERSION.to_string(),
            method: ci.method.name().to_string(),
            n,
            level: ci.level,
            estimate: finite(ci.estimate),
            lower: finite(ci.lower),
            upper: finite(ci.upper),
            na: ci.na.map(|r| r.name().to_string()),
        }
    }
}

pub fn write_ci_csv<W: Write>(w: W, rows: &[CiRow]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_ci_csv<R: std::io::Read>(r: R) -> csv::Result<Vec<CiRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse `args` (including the program name) and run the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::CiSingle(a) => ci_single_cmd(a, stdout),
        Command::CiPaired(a) => ci_paired_cmd(a, stdout),
        Command::Simulate(a) => simulate_cmd(a, stdout),
        Command::Sweep(a) => sweep_cmd(a, stdout),
        Command::Scenario(a) => scenario_cmd(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn read_counts<const K: usize>(
    inline: &[u64],
    file: Option<&Path>,
) -> std::result::Result<[u64; K], Failure> {
    let values: Vec<u64> = match file {
        None => inline.to_vec(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            text.lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u64>().map_err(|_| {
                        Failure(format!(
                            "{}: `{t}` is not a nonnegative integer",
                            path.display()
                        ))
                    })
                })
                .collect::<std::result::Result<_, _>>()?
        }
    };
    values
        .try_into()
        .map_err(|v: Vec<u64>| Failure(format!("expected {K} counts, got {}", v.len())))
}

fn emit_csv<F>(path: &Path, stdout: &mut dyn Write, write: F) -> std::result::Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> csv::Result<()>,
{
    if path.as_os_str() == "-" {
        write(stdout)?;
    } else {
        let mut f =
            fs::File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        write(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn fmt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

fn emit_intervals(rows: &[CiRow], out: &OutputArgs, stdout: &mut dyn Write) -> CmdResult {
    if let Some(path) = &out.csv {
        emit_csv(path, stdout, |w| write_ci_csv(w, rows))?;
    }
    if out.json {
        serde_json::to_writer_pretty(&mut *stdout, rows)?;
        writeln!(stdout)?;
    } else if out.csv.as_deref().is_none_or(|p| p.as_os_str() != "-") {
        writeln!(
            stdout,
            "{:<14} {:>9} {:>9} {:>9} {:>6}  note",
            "method", "estimate", "lower", "upper", "level"
        )?;
        for r in rows {
            writeln!(
                stdout,
                "{:<14} {:>9} {:>9} {:>9} {:>6}  {}",
                r.method,
                fmt_num(r.estimate),
                fmt_num(r.lower),
                fmt_num(r.upper),
                r.level,
                r.na.as_deref()
                    .map_or(String::new(), |s| format!("NA ({s})"))
            )?;
        }
    }
    Ok(if rows.iter().all(|r| r.na.is_some()) {
        EXIT_ALL_NA
    } else {
        EXIT_OK
    })
}

fn ci_single_cmd(a: CiSingleArgs, stdout: &mut dyn Write) -> CmdResult {
    let counts = CountsTable4::from_array(read_counts::<4>(&a.counts, a.counts_file.as_deref())?);
    let methods: &[Method] = match a.method {
        SingleMethodArg::Simple => &[Method::SimpleSingle],
        SingleMethodArg::Fisher => &[Method::FisherZ],
        SingleMethodArg::FisherNaive => &[Method::FisherZNaive],
        SingleMethodArg::All => &Method::SINGLE,
    };
    let mut rows = Vec::new();
    for &m in methods {
        rows.push(CiRow::new(&ci_single(&counts, a.level, m)?, counts.total()));
    }
    emit_intervals(&rows, &a.out, stdout)
}

fn paired_methods(m: PairedMethodArg) -> &'static [Method] {
    match m {
        PairedMethodArg::Simple => &[Method::SimplePaired],
        PairedMethodArg::Zou => &[Method::Zou],
        PairedMethodArg::Mt => &[Method::Mt],
        PairedMethodArg::All => &Method::PAIRED,
    }
}

fn ci_paired_cmd(a: CiPairedArgs, stdout: &mut dyn Write) -> CmdResult {
    let counts = CountsTable8(read_counts::<8>(&a.counts, a.counts_file.as_deref())?);
    let mut rows = Vec::new();
    for &m in paired_methods(a.method) {
        rows.push(CiRow::new(&ci_paired(&counts, a.level, m)?, counts.total()));
    }
    emit_intervals(&rows, &a.out, stdout)
}

fn resolve_scenario(s: &ScenarioSpec) -> std::result::Result<Scenario, Failure> {
    if let Some(path) = &s.scenario_file {
        let text =
            fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        return Ok(Scenario::from_kv(&text)?);
    }
    let prevalence = s.prevalence.expect("required by clap");
    let mcc1 = s.mcc1.expect("required by clap");
    Ok(match s.mcc2 {
        None => Scenario::Single(single_scenario(prevalence, mcc1)?),
        Some(mcc2) => Scenario::Paired(paired_scenario_with(
            prevalence, mcc1, mcc2, s.p001, s.p110,
        )?),
    })
}

fn simulate_cmd(a: SimulateArgs, stdout: &mut dyn Write) -> CmdResult {
    let scenario = resolve_scenario(&a.scenario)?;
    let mut cfg = SimConfig::new(scenario, a.n, a.m, a.seed);
    cfg.level = a.level;
    cfg.workers = a.workers;
    if !a.methods.is_empty() {
        cfg.methods = a
            .methods
            .iter()
            .map(|name| {
                let m: Method = name.trim().parse()?;
                Ok(if scenario.is_paired() && m == Method::SimpleSingle {
                    Method::SimplePaired
                } else {
                    m
                })
            })
            .collect::<std::result::Result<_, Error>>()?;
    }
    let report = run_coverage(&cfg)?;
    if let Some(path) = &a.out.csv {
        emit_csv(path, stdout, |w| {
            write_coverage_csv(w, std::slice::from_ref(&report))
        })?;
    }
    if a.out.json {
        serde_json::to_writer_pretty(&mut *stdout, &report.rows())?;
        writeln!(stdout)?;
    } else if a.out.csv.as_deref().is_none_or(|p| p.as_os_str() != "-") {
        write!(stdout, "{}", report.render_table())?;
    }
    Ok(EXIT_OK)
}

fn sweep_cmd(a: SweepArgs, stdout: &mut dyn Write) -> CmdResult {
    let summary_a = ClassifierSummary::new(a.sens_a, a.spec_a, a.prevalence)?;
    let summary_b =
        ClassifierSummary::new(a.sens_b, a.spec_b, a.prevalence_b.unwrap_or(a.prevalence))?;
    let method = match a.method {
        PairedMethodArg::All => {
            return Err(Failure("sweep takes a single method".into()));
        }
        m => paired_methods(m)[0],
    };
    let cfg = SweepConfig {
        summary_a,
        summary_b,
        n: a.n,
        level: a.level,
        p001_step: a.p001_step,
        p110_step: a.p110_step,
        method,
    };
    let rows = run_sweep(&cfg)?;
    if let Some(path) = &a.out.csv {
        emit_csv(path, stdout, |w| write_sweep_csv(w, &rows))?;
    }
    if a.out.json {
        serde_json::to_writer_pretty(&mut *stdout, &rows)?;
        writeln!(stdout)?;
    } else if a.out.csv.as_deref().is_none_or(|p| p.as_os_str() != "-") {
        let feasible: Vec<_> = rows.iter().filter(|r| r.feasible && !r.na).collect();
        let above = feasible.iter().filter(|r| r.lower >= 0.0).count();
        writeln!(
            stdout,
            "{} grid points, {} feasible, {} with lower bound >= 0",
            rows.len(),
            feasible.len(),
            above
        )?;
        writeln!(
            stdout,
            "{:>7} {:>7} {:>9} {:>9} {:>9}",
            "p001", "p110", "estimate", "lower", "upper"
        )?;
        for r in &rows {
            writeln!(
                stdout,
                "{:>7.4} {:>7.4} {:>9} {:>9} {:>9}",
                r.p001,
                r.p110,
                fmt_num(Some(r.estimate).filter(|x| x.is_finite())),
                fmt_num(Some(r.lower).filter(|x| x.is_finite())),
                fmt_num(Some(r.upper).filter(|x| x.is_finite())),
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn scenario_cmd(a: ScenarioArgs, stdout: &mut dyn Write) -> CmdResult {
    let text = resolve_scenario(&a.scenario)?.to_kv();
    match &a.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))?
        }
        None => write!(stdout, "{text}")?,
    }
    Ok(EXIT_OK)
}
