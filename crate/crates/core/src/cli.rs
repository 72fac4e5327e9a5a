//! Command-line front end. Exit codes: 0 success, 1 user error, 2 a
//! consistency failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::{LeaderMode, RunLimits, RunRecord, TraceSink};
use crate::experiments::{
    self, calibrate, check_cells, emit, fit, fit_points, read_cells_csv, CellRow, ExperimentSpec, FitPoint,
    FitResult, Model, Primitive, Report, SweepOptions, JOBS_ENV, REPORT_FILE,
};
use crate::labeling::{registry, run_config, run_config_traced, ProtocolConfig, ProtocolKind};
use crate::verify::state_lower_bound;
use crate::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USER: u8 = 1;
pub const EXIT_CONSISTENCY: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "poplabel", version, about = "Simulate and measure population labeling protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and print its record.
    Run(RunArgs),
    /// Execute an experiment spec and write cells.csv, report.json, plot.csv.
    Sweep(SweepArgs),
    /// Check a sweep's report against the lower bounds and protocol guarantees.
    Verify(VerifyArgs),
    /// Fit a growth model to a cells table.
    Fit(FitArgs),
    /// Calibrate a primitive's constant and write a fixture.
    Calibrate(CalibrateArgs),
    /// List registered protocols and their parameters.
    ListProtocols(ListArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    #[arg(long)]
    pub protocol: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c_phase: Option<f64>,
    #[arg(long, default_value = "oracle")]
    pub leader: LeaderMode,
    /// Single-cycle for non-square n.
    #[arg(long)]
    pub generalized: bool,
    /// Write every state change as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub max_interactions: Option<u64>,
    /// Print the full record as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = JOBS_ENV)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Directory written by `sweep`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// cells.csv or report.json.
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub model: String,
    /// Only use rows of this protocol.
    #[arg(long)]
    pub protocol: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub primitive: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fixture path; defaults to `calibration-<primitive>-n<n>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = JOBS_ENV)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ListArgs {
    #[arg(long)]
    pub json: bool,
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    ExitCode::from(run_from(std::env::args_os(), &mut io::stdout(), &mut io::stderr()))
}

/// Entry point with explicit arguments and streams; returns the exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USER,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::UnknownProtocol(_) => {
                    let _ = writeln!(err, "registered protocols: {}", registry().join(", "));
                }
                Error::UnknownModel(_) => {
                    let names: Vec<_> = Model::ALL.iter().map(|m| m.name()).collect();
                    let _ = writeln!(err, "available models: {}", names.join(", "));
                }
                _ => {}
            }
            EXIT_USER
        }
    }
}

fn header(out: &mut dyn Write, verb: &str, args: &impl Serialize) -> io::Result<()> {
    let flags = serde_json::to_string(args).unwrap_or_default();
    writeln!(out, "# poplabel {verb} {flags}")
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Error> {
    let stdout = |e| Error::io("<stdout>", e);
    match cmd {
        Command::Run(a) => {
            header(out, "run", &a).map_err(stdout)?;
            cmd_run(&a, out)
        }
        Command::Sweep(a) => {
            header(out, "sweep", &a).map_err(stdout)?;
            cmd_sweep(&a, out, err)
        }
        Command::Verify(a) => {
            header(out, "verify", &a).map_err(stdout)?;
            cmd_verify(&a, out)
        }
        Command::Fit(a) => {
            header(out, "fit", &a).map_err(stdout)?;
            cmd_fit(&a, out)
        }
        Command::Calibrate(a) => {
            header(out, "calibrate", &a).map_err(stdout)?;
            cmd_calibrate(&a, out)
        }
        Command::ListProtocols(a) => cmd_list(&a, out),
    }
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<u8, Error> {
    let kind: ProtocolKind = a.protocol.parse()?;
    let cfg = ProtocolConfig {
        kind,
        n: a.n,
        epsilon: a.epsilon,
        k: a.k,
        c_phase: a.c_phase,
        leader: a.leader,
        generalized: a.generalized,
    };
    cfg.validate()?;
    if a.max_interactions == Some(0) {
        return Err(Error::InvalidParameter("max-interactions must be at least 1".into()));
    }
    let limits = RunLimits::new(a.max_interactions.unwrap_or_else(|| cfg.default_max_interactions()));
    let record = match &a.trace {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            run_config_traced(&cfg, &limits, a.seed, TraceSink::new(Box::new(file)))?
        }
        None => run_config(&cfg, &limits, a.seed)?,
    };
    let traits = cfg.traits()?;
    let stdout = |e| Error::io("<stdout>", e);
    if a.json {
        let json = serde_json::to_string_pretty(&record).map_err(|source| Error::Json {
            path: "<stdout>".into(),
            source,
        })?;
        writeln!(out, "{json}").map_err(stdout)?;
    } else {
        print_record(out, &record, cfg.declared_range()?).map_err(stdout)?;
    }
    let broken = (traits.safe && !record.safety.is_ok())
        || (traits.certain_validity && record.completed && !record.validity.is_ok())
        || record.silence_certified == Some(false);
    Ok(if broken { EXIT_CONSISTENCY } else { EXIT_OK })
}

fn print_record(out: &mut dyn Write, r: &RunRecord, range: Option<u64>) -> io::Result<()> {
    writeln!(out, "protocol:          {}", r.protocol)?;
    writeln!(out, "n:                 {}", r.n)?;
    writeln!(out, "seed:              {}", r.seed)?;
    writeln!(out, "completed:         {}", r.completed)?;
    writeln!(out, "interactions:      {}", r.interactions_used)?;
    match range {
        Some(r) => writeln!(out, "range:             [1, {r}]")?,
        None => writeln!(out, "range:             none")?,
    }
    writeln!(out, "validity:          {}", if r.validity.is_ok() { "ok".to_string() } else { format!("{:?}", r.validity) })?;
    writeln!(out, "safety:            {}", if r.safety.is_ok() { "ok".to_string() } else { format!("{:?}", r.safety) })?;
    writeln!(out, "census:            {}", r.census)?;
    writeln!(out, "state lower bound: {:.2}", state_lower_bound(r.n))?;
    let cert = match r.silence_certified {
        Some(true) => "certified",
        Some(false) => "FAILED",
        None => "skipped",
    };
    writeln!(out, "silence:           {cert}")
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Error> {
    let spec = ExperimentSpec::load(&a.spec)?;
    spec.validate()?;
    if a.jobs == Some(0) {
        return Err(Error::InvalidParameter("jobs must be at least 1".into()));
    }
    let cancel = Arc::new(AtomicBool::new(false));
    {
        let flag = cancel.clone();
        // Only one handler per process; a second sweep in the same process keeps the first.
        let _ = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed));
    }
    let result = experiments::sweep(
        &spec,
        &SweepOptions {
            jobs: a.jobs,
            cancel: Some(cancel),
        },
    )?;
    let mut fits = Vec::new();
    for &model in &spec.fits {
        match fit(&result.cells, model) {
            Ok(f) => fits.push(f),
            Err(e) => {
                let _ = writeln!(err, "warning: skipping {model} fit: {e}");
            }
        }
    }
    let interrupted = result.interrupted;
    let report = Report::new(Some(&spec), result, fits);
    let files = emit(&a.out, &report)?;
    let stdout = |e| Error::io("<stdout>", e);
    print_cells(out, &report).map_err(stdout)?;
    for f in &report.fits {
        print_fit(out, f).map_err(stdout)?;
    }
    writeln!(out, "wrote {}, {}, {}", files.cells.display(), files.report.display(), files.plot.display())
        .map_err(stdout)?;
    if interrupted {
        let _ = writeln!(err, "interrupted: partial results written, unfinished cells are flagged incomplete");
        return Ok(EXIT_USER);
    }
    Ok(EXIT_OK)
}

fn print_cells(out: &mut dyn Write, report: &Report) -> io::Result<()> {
    writeln!(
        out,
        "{:<22} {:>6} {:>6} {:>4} {:>8} {:>9} {:>14} {:>12} {:>7} {:>5} {:>5}",
        "protocol", "n", "eps", "k", "leader", "done", "mean", "stderr", "census", "inv", "unsafe"
    )?;
    for c in &report.cells {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<22} {:>6} {:>6} {:>4} {:>8} {:>4}/{:<4} {:>14} {:>12} {:>7} {:>5} {:>5}{}",
            c.protocol,
            c.n,
            opt(c.epsilon.map(|e| e.to_string())),
            opt(c.k.map(|k| k.to_string())),
            c.leader_mode,
            c.completed,
            c.trials,
            opt(c.interactions.map(|s| format!("{:.1}", s.mean))),
            opt(c.interactions.map(|s| format!("{:.1}", s.stderr))),
            opt(c.census_max.map(|s| s.to_string())),
            c.validity_failures,
            c.safety_violations,
            if c.incomplete { "  incomplete" } else { "" }
        )?;
    }
    Ok(())
}

fn print_fit(out: &mut dyn Write, f: &FitResult) -> io::Result<()> {
    writeln!(out, "fit {}: a = {:.6}, R^2 = {:.6}", f.formula, f.coefficient, f.r_squared)?;
    if let Some(s) = f.loglog_slope {
        writeln!(out, "  log-log slope (diagnostic): {s:.4}")?;
    }
    writeln!(out, "  {:>8} {:>8} {:>16} {:>16} {:>12}", "n", "eps", "measured", "fitted", "residual")?;
    for r in &f.residuals {
        writeln!(
            out,
            "  {:>8} {:>8} {:>16.1} {:>16.1} {:>12.1}",
            r.n,
            r.epsilon.map(|e| e.to_string()).unwrap_or_else(|| "-".into()),
            r.measured,
            r.fitted,
            r.residual
        )?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8, Error> {
    let report = Report::load(&a.out.join(REPORT_FILE))?;
    let checks = check_cells(&report.cells)?;
    let stdout = |e| Error::io("<stdout>", e);
    let mut failed = 0;
    for c in &checks {
        let ok = c.is_consistent();
        writeln!(
            out,
            "{} {} n={}{}{}",
            if ok { "ok  " } else { "FAIL" },
            c.protocol,
            c.n,
            c.epsilon.map(|e| format!(" eps={e}")).unwrap_or_default(),
            c.k.map(|k| format!(" k={k}")).unwrap_or_default(),
        )
        .map_err(stdout)?;
        if !ok {
            failed += 1;
            for p in &c.problems {
                writeln!(out, "    {p}").map_err(stdout)?;
            }
            if let Some(b) = &c.bounds {
                let json = serde_json::to_string_pretty(b).unwrap_or_default();
                writeln!(out, "{json}").map_err(stdout)?;
            }
        }
    }
    if report.interrupted {
        writeln!(out, "note: the sweep was interrupted; some cells are partial").map_err(stdout)?;
    }
    writeln!(out, "{} of {} cells consistent", checks.len() - failed, checks.len()).map_err(stdout)?;
    Ok(if failed > 0 { EXIT_CONSISTENCY } else { EXIT_OK })
}

fn load_points(path: &Path, protocol: Option<&str>) -> Result<Vec<FitPoint>, Error> {
    let keep = |p: &str| protocol.map_or(true, |want| want == p);
    if path.extension().is_some_and(|e| e == "json") {
        let report = Report::load(path)?;
        let cells: Vec<_> = report.cells.into_iter().filter(|c| keep(&c.protocol)).collect();
        Ok(FitPoint::from_cells(&cells))
    } else {
        Ok(read_cells_csv(path)?
            .iter()
            .filter(|r| keep(&r.protocol))
            .filter_map(CellRow::fit_point)
            .collect())
    }
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<u8, Error> {
    let model: Model = a.model.parse()?;
    if let Some(p) = &a.protocol {
        p.parse::<ProtocolKind>()?;
    }
    let points = load_points(&a.cells, a.protocol.as_deref())?;
    let f = fit_points(&points, model)?;
    print_fit(out, &f).map_err(|e| Error::io("<stdout>", e))?;
    Ok(EXIT_OK)
}

fn cmd_calibrate(a: &CalibrateArgs, out: &mut dyn Write) -> Result<u8, Error> {
    let primitive: Primitive = a.primitive.parse()?;
    if a.jobs == Some(0) {
        return Err(Error::InvalidParameter("jobs must be at least 1".into()));
    }
    let c = calibrate(primitive, a.n, a.trials, a.seed, a.jobs)?;
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("calibration-{}-n{}.json", primitive, a.n)));
    c.save(&path)?;
    let stdout = |e| Error::io("<stdout>", e);
    for g in &c.grid {
        writeln!(
            out,
            "  c = {:<5} {:>5}/{:<5} mean/(n ln n) = {:.3}",
            g.constant, g.successes, g.trials, g.mean_ratio
        )
        .map_err(stdout)?;
    }
    if let Some(s) = &c.ratios {
        writeln!(out, "  ratio median {:.4}, p95 {:.4}, max {:.4}", s.median, s.p95, s.max).map_err(stdout)?;
    }
    match c.constant {
        Some(k) => {
            writeln!(out, "{primitive}: constant = {k} ({})", c.statistic).map_err(stdout)?;
            writeln!(out, "wrote {}", path.display()).map_err(stdout)?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "{primitive}: no grid value met the target; wrote {}", path.display()).map_err(stdout)?;
            Ok(EXIT_CONSISTENCY)
        }
    }
}

#[derive(Serialize)]
struct ProtocolInfo {
    name: &'static str,
    parameters: &'static [&'static str],
    needs_leader: bool,
    summary: &'static str,
}

fn cmd_list(a: &ListArgs, out: &mut dyn Write) -> Result<u8, Error> {
    let infos: Vec<ProtocolInfo> = ProtocolKind::ALL
        .iter()
        .map(|&k| ProtocolInfo {
            name: k.name(),
            parameters: k.parameters(),
            needs_leader: k.needs_leader(),
            summary: k.summary(),
        })
        .collect();
    let stdout = |e| Error::io("<stdout>", e);
    if a.json {
        let json = serde_json::to_string_pretty(&infos).unwrap_or_default();
        writeln!(out, "{json}").map_err(stdout)?;
    } else {
        for i in &infos {
            let params = if i.parameters.is_empty() { "-".to_string() } else { i.parameters.join(",") };
            writeln!(out, "{:<22} n,leader,{:<18} {}", i.name, params, i.summary).map_err(stdout)?;
        }
    }
    Ok(EXIT_OK)
}
