//! Reproduction front end for the hidden-momentum tables.
//!
//! Every command writes a self-describing table (CSV or JSON) whose metadata
//! block echoes the full configuration, so a file can be regenerated from its
//! own header.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hidden_momentum::basis::QuantumNumbers;
use hidden_momentum::quadrature::QuadratureConfig;
use hidden_momentum::stark::DEFAULT_FIELD;

pub use commands::{AppendixReport, Outcome};
pub use config::{Format, RunConfig};
pub use error::{CliError, CliResult};
pub use table::FigureTable;

#[derive(Debug, Parser)]
#[command(
    name = "hidmom",
    version,
    about = "Hidden momentum of a hydrogen atom in a uniform electric field"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Both estimators and their ratio for one state.
    HiddenMomentum {
        /// Unperturbed state as n,l,m.
        #[arg(long, default_value = "2,1,1")]
        state: QuantumNumbers,
        /// Field tilt from x̂ toward ẑ, radians.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ratio against -m for the eleven reference states.
    Figure3 {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ratio of (3,1,-1) against cos θ over a tilt sweep.
    Figure4 {
        /// Evenly spaced tilts on [0, π].
        #[arg(long, default_value_t = config::DEFAULT_THETA_POINTS)]
        theta_points: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// n = 2 Stark manifold and the dynamics of the perturbed (2,1,1) state.
    Appendix {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Field strength, atomic units.
    #[arg(long, default_value_t = DEFAULT_FIELD)]
    pub field: f64,
    /// Highest principal quantum number in the perturbative expansion.
    #[arg(long, default_value_t = config::DEFAULT_N_MAX)]
    pub nmax: u32,
    /// csv or json; tables default to csv, the appendix report to json.
    #[arg(long)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 when any acceptance tolerance is breached.
    #[arg(long)]
    pub check: bool,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Extra Gauss-Laguerre nodes beyond the exactness requirement.
    #[arg(long, default_value_t = QuadratureConfig::default().radial_margin)]
    pub radial_margin: usize,
    /// Extra Gauss-Legendre nodes beyond l_a + l_b.
    #[arg(long, default_value_t = QuadratureConfig::default().angular_extra)]
    pub angular_extra: usize,
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::HiddenMomentum { common, .. }
            | Command::Figure3 { common }
            | Command::Figure4 { common, .. }
            | Command::Appendix { common } => common,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        let c = self.common();
        let mut cfg = RunConfig {
            n_max: c.nmax,
            field: c.field,
            quadrature: QuadratureConfig {
                radial_margin: c.radial_margin,
                angular_extra: c.angular_extra,
            },
            ..RunConfig::default()
        };
        match self {
            Command::HiddenMomentum { state, theta, .. } => {
                cfg.state = *state;
                cfg.theta = *theta;
            }
            Command::Figure4 { theta_points, .. } => cfg.theta_points = *theta_points,
            _ => {}
        }
        cfg
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Appendix { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug)]
pub enum Output {
    Table(FigureTable),
    Appendix(AppendixReport),
}

impl Output {
    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match (self, format) {
            (Output::Table(t), Format::Csv) => {
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                Ok(buf)
            }
            (Output::Table(t), Format::Json) => Ok(t.to_json()?.into_bytes()),
            (Output::Appendix(r), Format::Json) => Ok(r.to_json()?.into_bytes()),
            (Output::Appendix(_), Format::Csv) => Err(CliError::Config("the appendix report is JSON only".into())),
        }
    }
}

/// Runs a parsed command. Timing is measured here and stored in the output.
pub fn execute(command: &Command) -> CliResult<Outcome<Output>> {
    let cfg = command.run_config();
    let start = Instant::now();
    let outcome = match command {
        Command::HiddenMomentum { .. } => map_table(commands::hidden_momentum(&cfg)?),
        Command::Figure3 { .. } => map_table(commands::figure3(&cfg)?),
        Command::Figure4 { .. } => map_table(commands::figure4(&cfg)?),
        Command::Appendix { .. } => {
            let o = commands::appendix(&cfg)?;
            Outcome {
                output: Output::Appendix(o.output),
                breaches: o.breaches,
                failures: o.failures,
            }
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let output = match outcome.output {
        Output::Table(mut t) => {
            t.elapsed_seconds = elapsed;
            Output::Table(t)
        }
        Output::Appendix(mut r) => {
            r.elapsed_seconds = elapsed;
            Output::Appendix(r)
        }
    };
    Ok(Outcome { output, ..outcome })
}

fn map_table(o: Outcome<FigureTable>) -> Outcome<Output> {
    Outcome {
        output: Output::Table(o.output),
        breaches: o.breaches,
        failures: o.failures,
    }
}

/// Full CLI behavior minus argument parsing; returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match try_run(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let common = cli.command.common();
    let format = common.format.unwrap_or_else(|| cli.command.default_format());
    if matches!(cli.command, Command::Appendix { .. }) && format == Format::Csv {
        return Err(CliError::Config("the appendix report is JSON only".into()));
    }
    let outcome = match common.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| execute(&cli.command))?,
        None => execute(&cli.command)?,
    };
    let bytes = outcome.output.render(format)?;
    match &common.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    for f in &outcome.failures {
        writeln!(stderr, "error: {f}")?;
    }
    if let Some(first) = outcome.failures.first() {
        return Ok(first.exit_code());
    }
    if common.check {
        for b in &outcome.breaches {
            writeln!(stderr, "tolerance breach: {b}")?;
        }
        if !outcome.breaches.is_empty() {
            return Ok(error::EXIT_TOLERANCE_BREACH);
        }
    }
    Ok(0)
}
