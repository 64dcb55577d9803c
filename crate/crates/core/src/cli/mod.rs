//! Command-line front end: `verify`, `integrate`, `rep` and `stability`.
//!
//! Exit codes: 0 when every requested certification passed, 1 on a
//! verification failure, 2 on a malformed command line or configuration.

pub mod commands;
pub mod config;
pub mod report;
pub mod system;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::stability::DEFAULT_SEED;
use config::Config;
use report::{digest, write_atomic, Report};

#[derive(Parser, Debug)]
#[command(name = "cosym", about = "Time-dependent Hamiltonian mechanics on cosymplectic manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Momentum-map, cocycle, tangency and reduction checks.
    Verify(CommonArgs),
    /// Integrate the evolution field and monitor first integrals.
    Integrate(CommonArgs),
    /// Find and certify relative equilibria.
    Rep(CommonArgs),
    /// Spectral scan and stability verdict at a relative equilibrium.
    Stability(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config `seed` (default 0x5EED).
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Integrate(_) => "integrate",
            Command::Rep(_) => "rep",
            Command::Stability(_) => "stability",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a) | Command::Integrate(a) | Command::Rep(a) | Command::Stability(a) => a,
        }
    }
}

/// Runs one command and returns its report (exit code inside).
pub fn execute(command: &Command) -> Result<Report> {
    let start = Instant::now();
    let args = command.args();
    let bytes = std::fs::read(&args.config).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config {
        line: 0,
        message: "config is not UTF-8".into(),
    })?;
    let cfg = Config::parse(&text)?;
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.u64_opt("seed")?.unwrap_or(DEFAULT_SEED),
    };
    let sys = system::build(&cfg)?;
    let mut report = Report::new(command.name(), sys.kind.name(), digest(&bytes), seed);
    match command {
        Command::Verify(_) => commands::verify(&sys, &cfg, &mut report)?,
        Command::Integrate(_) => commands::integrate_cmd(&sys, &cfg, &args.out, &mut report)?,
        Command::Rep(_) => commands::rep_cmd(&sys, &cfg, &args.out, &mut report)?,
        Command::Stability(_) => commands::stability_cmd(&sys, &cfg, &args.out, &mut report)?,
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    write_atomic(&args.out, "report.txt", &report.to_text())?;
    Ok(report)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            print!("{}", report.to_text());
            report.exit_code()
        }
        Err(e @ (Error::Config { .. } | Error::InvalidInput(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
