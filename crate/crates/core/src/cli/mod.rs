//! Command-line front end. `main` only parses arguments and calls [`run`].
//!
//! Exit codes: `0` success, `1` analysis error, `2` parse or validation
//! error, `3` corpus mismatch.

mod commands;
pub mod corpus;
pub mod report;
pub mod system;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::RunOptions;
pub use report::Report;
pub use system::{parse_system, parse_system_str, SystemDescription, SystemFile};

use crate::error::Error;
use crate::nyquist::GridOptions;
use crate::tolerance::ROOT_TOL_ENV;
use crate::Tolerances;

pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mimostab", version, about = "Stability and robustness analysis of MIMO rational transfer matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Root-matching tolerance.
    #[arg(long, global = true, env = ROOT_TOL_ENV)]
    pub tol_root: Option<f64>,

    /// Half-width of the marginal band around the imaginary axis.
    #[arg(long, global = true)]
    pub tol_marginal: Option<f64>,

    /// Base points of the frequency grid before refinement.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,

    /// Upper end of the base frequency grid.
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,

    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,

    /// Write curve CSVs into this directory.
    #[arg(long, global = true)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-loop verdict, cross-checked by the determinant and Nyquist tests.
    Stability {
        system: PathBuf,
        /// Block `U` in series with the plant.
        #[arg(long)]
        block: Option<PathBuf>,
    },
    /// Nyquist test on det(I + P).
    Nyquist { system: PathBuf },
    /// Generalized Nyquist test on the eigenvalue loci.
    Gnc { system: PathBuf },
    /// Uniform gain and phase margins.
    Margins { system: PathBuf },
    /// Small-gain test for the loop of two systems.
    Smallgain { g1: PathBuf, g2: PathBuf },
    /// Additive and multiplicative uncertainty bounds.
    Bounds {
        system: PathBuf,
        #[arg(long)]
        block: Option<PathBuf>,
    },
    /// Positive-real classification, or the passivity test when two systems are given.
    Passivity { g1: PathBuf, g2: Option<PathBuf> },
    /// Mixed small-gain and positive-real test.
    Mixed { g1: PathBuf, g2: PathBuf },
    /// Runs the built-in corpus against its stored expectations.
    PaperSuite {
        /// Expectations file to use in place of the built-in one.
        #[arg(long)]
        expectations: Option<PathBuf>,
    },
}

impl Cli {
    pub fn options(&self) -> Result<RunOptions, Error> {
        let mut tol = Tolerances::from_env();
        if let Some(v) = self.tol_root {
            tol.root = positive("--tol-root", v)?;
        }
        if let Some(v) = self.tol_marginal {
            tol.marginal = positive("--tol-marginal", v)?;
        }
        let mut grid = GridOptions::default();
        if let Some(n) = self.grid_points {
            if n < 8 {
                return Err(Error::Validation("--grid-points must be at least 8".into()));
            }
            grid.base_points = n;
        }
        if let Some(w) = self.omega_max {
            grid.omega_max = Some(positive("--omega-max", w)?);
        }
        Ok(RunOptions { tol, grid, curves: self.curves.clone() })
    }
}

fn positive(flag: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Validation(format!("{flag} must be a positive number, got {v}")))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation(_) => EXIT_INPUT,
        _ => EXIT_ANALYSIS,
    }
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    let opts = cli.options()?;
    let load = |p: &PathBuf| parse_system(p, &opts.tol);
    let load_opt = |p: &Option<PathBuf>| p.as_ref().map(load).transpose();
    let (report, exit_code) = match &cli.command {
        Command::Stability { system, block } => (commands::stability(&load(system)?, load_opt(block)?.as_ref(), &opts)?, 0),
        Command::Nyquist { system } => (commands::nyquist(&load(system)?, &opts)?, 0),
        Command::Gnc { system } => (commands::gnc(&load(system)?, &opts)?, 0),
        Command::Margins { system } => (commands::margins(&load(system)?, &opts)?, 0),
        Command::Smallgain { g1, g2 } => (commands::smallgain(&load(g1)?, &load(g2)?, &opts)?, 0),
        Command::Bounds { system, block } => (commands::bounds(&load(system)?, load_opt(block)?.as_ref(), &opts)?, 0),
        Command::Passivity { g1, g2 } => (commands::passivity(&load(g1)?, load_opt(g2)?.as_ref(), &opts)?, 0),
        Command::Mixed { g1, g2 } => (commands::mixed(&load(g1)?, &load(g2)?, &opts)?, 0),
        Command::PaperSuite { expectations } => {
            let text = match expectations {
                Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Parse {
                    location: path.display().to_string(),
                    message: e.to_string(),
                })?,
                None => corpus::EXPECTATIONS.to_string(),
            };
            let (report, ok) = corpus::paper_suite_with(&text, &opts)?;
            (report, if ok { 0 } else { EXIT_MISMATCH })
        }
    };
    if let Some(path) = &cli.json {
        std::fs::write(path, report.json())?;
    }
    Ok(Outcome { report, exit_code })
}

/// Parses `args` (including the program name), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.report.text());
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
