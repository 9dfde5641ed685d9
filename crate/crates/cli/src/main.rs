mod commands;
mod config;
mod error;
mod output;
mod quantity;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{usage, CliResult};
use crate::output::RunLog;
use crate::quantity::{Capacitance, Frequency};
use zcoupling::Execution;

/// Exchange coupling, transmon spectra and ZZ crosstalk from impedance data.
///
/// Physical inputs carry units: `--ec "250 MHz"`, `--c1 81.94fF`.
#[derive(Debug, Parser)]
#[command(name = "zcoupling", version)]
struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for data files and run.log (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Also write a gnuplot script for the data files.
    #[arg(long, global = true)]
    plot: bool,

    /// Worker threads for sweeps; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmon levels, anharmonicity and charge matrix elements.
    Spectrum(SpectrumArgs),
    /// Josephson energy that puts q01 at a target frequency.
    Calibrate(CalibrateArgs),
    /// J from an impedance file over a qubit-frequency sweep.
    Jrate(JrateArgs),
    /// J from the weak-coupling capacitor formula.
    Jcap(JcapArgs),
    /// Coupling capacitance that reproduces a measured J.
    Fitcc(FitccArgs),
    /// ZZ rate against coupler frequency.
    Zz(ZzArgs),
    /// Port impedance of a netlist on a frequency grid.
    NetlistZ(NetlistZArgs),
    /// Principal-value identity on a lossy impedance table.
    PvCheck(PvCheckArgs),
    /// Built-in cross-validation checks.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumArgs {
    /// Charging energy E_C/h.
    #[arg(long)]
    pub ec: Option<Frequency>,
    /// Josephson energy E_J/h.
    #[arg(long)]
    pub ej: Option<Frequency>,
    /// Offset charge in units of 2e (default 0).
    #[arg(long)]
    pub ng: Option<f64>,
    /// Levels to report (default 4).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Initial charge-basis cutoff N (default 30).
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateArgs {
    /// Target q01.
    #[arg(long)]
    pub q01: Option<Frequency>,
    /// Charging energy E_C/h (or give --c).
    #[arg(long)]
    pub ec: Option<Frequency>,
    /// Total island capacitance.
    #[arg(long)]
    pub c: Option<Capacitance>,
    #[arg(long)]
    pub ng: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// q1 = q2 swept together.
    Equal,
    /// q1 held at --fixed, q2 swept.
    Fixed,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JrateArgs {
    /// Touchstone (.sNp) or CSV impedance file.
    #[arg(long)]
    pub impedance: Option<PathBuf>,
    /// Qubit 1 total capacitance (or give --ec1).
    #[arg(long)]
    pub c1: Option<Capacitance>,
    #[arg(long)]
    pub c2: Option<Capacitance>,
    /// Qubit 1 charging energy E_C/h.
    #[arg(long)]
    pub ec1: Option<Frequency>,
    #[arg(long)]
    pub ec2: Option<Frequency>,
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
    /// Qubit 1 frequency in fixed mode.
    #[arg(long)]
    pub fixed: Option<Frequency>,
    #[arg(long)]
    pub from: Option<Frequency>,
    #[arg(long)]
    pub to: Option<Frequency>,
    /// Sweep points (default 101).
    #[arg(long)]
    pub points: Option<usize>,
    /// 1-based port of qubit 1 (default 1).
    #[arg(long)]
    pub port1: Option<usize>,
    /// 1-based port of qubit 2 (default 2).
    #[arg(long)]
    pub port2: Option<usize>,
    #[arg(long)]
    pub ng: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcapArgs {
    #[arg(long)]
    pub c1: Option<Capacitance>,
    #[arg(long)]
    pub c2: Option<Capacitance>,
    #[arg(long)]
    pub cc: Option<Capacitance>,
    #[arg(long)]
    pub q1: Option<Frequency>,
    #[arg(long)]
    pub q2: Option<Frequency>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitccArgs {
    /// Target J/h.
    #[arg(long)]
    pub j: Option<Frequency>,
    #[arg(long)]
    pub c1: Option<Capacitance>,
    #[arg(long)]
    pub c2: Option<Capacitance>,
    #[arg(long)]
    pub q1: Option<Frequency>,
    #[arg(long)]
    pub q2: Option<Frequency>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZzArgs {
    #[arg(long)]
    pub q1: Option<Frequency>,
    #[arg(long)]
    pub q2: Option<Frequency>,
    /// Anharmonicity magnitudes.
    #[arg(long)]
    pub alpha1: Option<Frequency>,
    #[arg(long)]
    pub alpha2: Option<Frequency>,
    #[arg(long)]
    pub alpha_c: Option<Frequency>,
    /// Direct qubit-qubit coupling J12/h (signed).
    #[arg(long, allow_hyphen_values = true)]
    pub j12: Option<Frequency>,
    /// CSV with columns q_c_GHz,J1c_MHz,J2c_MHz.
    #[arg(long)]
    pub j_curve: Option<PathBuf>,
    /// Coupler sweep start.
    #[arg(long)]
    pub from: Option<Frequency>,
    #[arg(long)]
    pub to: Option<Frequency>,
    /// Sweep points (default 101).
    #[arg(long)]
    pub points: Option<usize>,
    /// Levels per oscillator (default 5).
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Touchstone,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistZArgs {
    /// Netlist text file.
    #[arg(long)]
    pub netlist: Option<PathBuf>,
    #[arg(long)]
    pub from: Option<Frequency>,
    #[arg(long)]
    pub to: Option<Frequency>,
    /// Grid points (default 201).
    #[arg(long)]
    pub points: Option<usize>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvCheckArgs {
    /// Lossy impedance file (Touchstone or CSV).
    #[arg(long)]
    pub impedance: Option<PathBuf>,
    /// Use the built-in lossy resonator at this quality factor instead.
    #[arg(long)]
    pub oracle_q: Option<f64>,
    /// Probe frequency (defaults to the oracle's).
    #[arg(long)]
    pub q: Option<Frequency>,
    #[arg(long)]
    pub port1: Option<usize>,
    #[arg(long)]
    pub port2: Option<usize>,
    /// Largest acceptable relative gap (default 1e-2).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    /// all, or one of capacitive, pv, splitting, foster (full names accepted).
    pub selector: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Calibrate(_) => "calibrate",
            Command::Jrate(_) => "jrate",
            Command::Jcap(_) => "jcap",
            Command::Fitcc(_) => "fitcc",
            Command::Zz(_) => "zz",
            Command::NetlistZ(_) => "netlist-z",
            Command::PvCheck(_) => "pv-check",
            Command::Oracle(_) => "oracle",
        }
    }
}

fn execution(jobs: Option<usize>) -> CliResult<Execution> {
    match jobs {
        None => Ok(Execution::default()),
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            {
                // A pool can only be installed once per process; ignore a
                // second attempt.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            #[cfg(not(feature = "parallel"))]
            log::warn!("built without the parallel feature; --jobs {n} runs sequentially");
            Ok(Execution::default())
        }
    }
}

fn run(cli: Cli, log: &mut RunLog) -> CliResult<bool> {
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out = match cli.out {
        Some(p) => p,
        None => config.out()?.unwrap_or_else(|| PathBuf::from(".")),
    };
    let jobs = cli.jobs.or(config.jobs()?);
    let exec = execution(jobs)?;
    log.out = Some(out.clone());
    log.jobs = jobs;

    let name = cli.command.name();
    let outcome = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(config.merged(name, a, &[])?),
        Command::Calibrate(a) => commands::calibrate(config.merged(name, a, &[])?),
        Command::Jrate(a) => commands::jrate(config.merged(name, a, &["impedance"])?, exec),
        Command::Jcap(a) => commands::jcap(config.merged(name, a, &[])?),
        Command::Fitcc(a) => commands::fitcc(config.merged(name, a, &[])?),
        Command::Zz(a) => commands::zz(config.merged(name, a, &["j_curve"])?, exec),
        Command::NetlistZ(a) => commands::netlist_z(config.merged(name, a, &["netlist"])?, exec),
        Command::PvCheck(a) => commands::pv_check(config.merged(name, a, &["impedance"])?, exec),
        Command::Oracle(a) => commands::oracle(config.merged(name, a, &[])?, exec),
    }?;
    output::emit(name, &outcome, &out, cli.json, cli.plot, log)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    let clock = Instant::now();
    let mut log = RunLog::new(cli.command.name(), started);
    let code = match run(cli, &mut log) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            log.error = Some(e.to_string());
            e.exit_code()
        }
    };
    log.finish(code, clock.elapsed());
    ExitCode::from(code as u8)
}
