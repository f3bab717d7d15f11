//! Front end for `levy-core`: one subcommand per pipeline stage, CSV and
//! JSON outputs, and the `verify` report.

pub mod commands;
pub mod config;
pub mod verify;

use clap::{Parser, Subcommand};
use levy_core::LevyError;

pub use config::{fmt12, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "levy", version, about = "Lévy process generators, quasi-potentials and survival probabilities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transition density ρ(x,t): CSV x,rho.
    Density(RunConfig),
    /// Convolution kernel k(y): CSV y,k0,k,signpart.
    Kernel(RunConfig),
    /// Quasi-potential kernel Φ on the domain grid: CSV x,y,phi.
    Greens(RunConfig),
    /// Numerical range and conditioning of the quasi-potential: JSON.
    Sectorial(RunConfig),
    /// Survival probability p(t,Δ): CSV t,p,method.
    Survive(RunConfig),
    /// Penalized density integral against a Monte Carlo estimate: JSON.
    Fk(RunConfig),
    /// Monte Carlo survival: CSV t,p,se.
    Mc(RunConfig),
    /// Invariant suites: JSON list of {check, module, value, tolerance, pass}.
    Verify(RunConfig),
}

impl Command {
    fn config(&self) -> &RunConfig {
        match self {
            Command::Density(c)
            | Command::Kernel(c)
            | Command::Greens(c)
            | Command::Sectorial(c)
            | Command::Survive(c)
            | Command::Fk(c)
            | Command::Mc(c)
            | Command::Verify(c) => c,
        }
    }
}

fn verify(cfg: &RunConfig) -> levy_core::Result<String> {
    let checks = verify::run_suite(cfg.suite.as_deref().unwrap_or("all"), cfg.model.as_ref())?;
    let mut s = serde_json::to_string_pretty(&checks).expect("report serializes");
    s.push('\n');
    Ok(s)
}

fn execute(cmd: &Command) -> levy_core::Result<String> {
    let cfg = cmd.config();
    match cmd {
        Command::Density(_) => commands::density(cfg),
        Command::Kernel(_) => commands::kernel(cfg),
        Command::Greens(_) => commands::greens(cfg),
        Command::Sectorial(_) => commands::sectorial(cfg),
        Command::Survive(_) => commands::survive(cfg),
        Command::Fk(_) => commands::fk(cfg),
        Command::Mc(_) => commands::mc(cfg),
        Command::Verify(_) => verify(cfg),
    }
}

fn kind(e: &LevyError) -> (&'static str, i32) {
    if e.is_numerical() {
        ("numerical", 2)
    } else {
        ("validation", 1)
    }
}

fn threads() {
    let n = std::env::var("LEVY_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the command line and returns the exit code: 0 on success, 1 for
/// usage and validation errors, 2 for numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    threads();
    let cfg = cli.command.config();
    let result = execute(&cli.command).and_then(|text| {
        config::write_output(cfg.out.as_ref(), &text).map_err(|e| LevyError::Parse(format!("cannot write output: {e}")))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let (k, code) = kind(&e);
            eprintln!("error kind={k} code={code}: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}
