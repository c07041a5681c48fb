//! `lipquo`: build the quotient construction for a polynomial, run the
//! verification suites, solve fibers and export evaluation grids.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// A check failed; the report has already been written.
    Violation,
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Violation => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<lipquo::Error> for CliError {
    fn from(e: lipquo::Error) -> Self {
        use lipquo::Error as E;
        match e {
            E::InvalidPolynomial(_) | E::DegeneratePolynomial | E::ConstantPolynomial | E::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lipquo", version, about = "Polynomial Lipschitz quotients of the plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Job config (TOML, or JSON with a .json extension).
    #[arg(long)]
    pub poly: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical points, construction constants and the constant chain.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites (the default corpus when no --poly is given).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Replace every co-Lipschitz constant (falsifiability control).
        #[arg(long)]
        force_c: Option<f64>,
    },
    /// Evaluate F2 on a rectangular grid and write CSV.
    Grid {
        #[command(flatten)]
        common: Common,
        /// xmin,xmax,ymin,ymax,nx,ny
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Also write the h2 image of each grid point.
        #[arg(long)]
        with_h2: bool,
    },
    /// All points of F2^{-1}(w).
    Fiber {
        #[command(flatten)]
        common: Common,
        /// re,im
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze { common } => commands::analyze(&common),
        Command::Verify { common, suite, force_c } => commands::verify(&common, &suite, force_c),
        Command::Grid { common, grid, with_h2 } => commands::grid(&common, grid.as_deref(), with_h2),
        Command::Fiber { common, target } => commands::fiber(&common, &target),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Violation => eprintln!("lipquo: verification failed"),
                CliError::Config(m) => eprintln!("lipquo: config error: {m}"),
                CliError::Numerical(m) => eprintln!("lipquo: numerical failure: {m}"),
                CliError::Io(m) => eprintln!("lipquo: i/o error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
