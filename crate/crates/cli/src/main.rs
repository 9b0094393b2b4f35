mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use supertile::Error;

const CSV_HELP: &str = "\
Output files (written to --out, default the current directory):
  validate   validate.json
  render     render.svg
  deviation  deviation.csv with columns
               R, deviation, residual, phi2_abs, deviation_envelope, residual_envelope
             deviation_summary.json
  limitlaw   limitlaw.csv with columns n, sample_id, r, value, renormalized
             limitlaw_summary.json
  spectrum   spectrum.json (also printed)
  export     <name>.json (printed when --out is absent)

CSV files start with `#` comment lines holding the tool version, the config,
the RNG seed and the spectral summary. Floats use 17 significant digits.

Exit codes: 0 success, 1 I/O, 2 validation failure,
3 precondition or hypothesis failure, 64 usage error.";

#[derive(Debug, Parser)]
#[command(name = "supertile", version, about = "Self-similar tilings: validation, deviations of ergodic integrals and limit laws")]
#[command(after_help = CSV_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub source: Source,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Geometric tolerance for validation.
    #[arg(long, global = true, default_value_t = supertile::validate::DEFAULT_TOL)]
    pub tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("src").required(true).multiple(false).args(["system", "json"])))]
pub struct Source {
    /// Built-in system: fibonacci, nonpisot13, table2d, chair, bicolor3x3.
    #[arg(long, global = true)]
    pub system: Option<String>,

    /// System definition file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Cube,
    Ball,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check cover, overlap and primitivity; writes validate.json.
    Validate,
    /// Draw an order-n supertile as SVG.
    Render {
        /// Supertile order.
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// Prototile id (1-based).
        #[arg(long, default_value_t = 1)]
        kind: usize,
        /// Outline supertiles of every intermediate order.
        #[arg(long)]
        outlines: bool,
    },
    /// Deviation sweep over dilated domains R * Omega.
    Deviation {
        /// Tile densities c_1,...,c_m (default: catalog choice, else the indicator of type 1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        f: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = DomainArg::Cube)]
        domain: DomainArg,
        #[arg(long)]
        rmin: Option<f64>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long, default_value_t = 16)]
        rpoints: usize,
        /// Hierarchy depth K (default: smallest covering depth).
        #[arg(long)]
        depth: Option<u32>,
        /// Skip the placements anchored at supertile vertices.
        #[arg(long)]
        no_anchors: bool,
    },
    /// Limit-law sampling of normalized integrals over cubes Q_{r lambda^n} + y.
    Limitlaw {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        f: Option<Vec<f64>>,
        /// Scales as `a..b` (inclusive).
        #[arg(long, default_value = "2..5")]
        n_range: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Comma-separated r values in (0, 1], or a count k for {1/k, ..., 1}.
        #[arg(long, default_value = "8")]
        r_grid: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sampling window side in units of lambda^{n_max}.
        #[arg(long, default_value_t = supertile::experiments::limitlaw::DEFAULT_WINDOW_FACTOR)]
        window_factor: f64,
    },
    /// Spectral summary of the substitution matrix.
    Spectrum,
    /// Write the system in the JSON file format.
    Export,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownName(_) | Error::InvalidArgument(_) => 64,
        Error::Rejected(_) | Error::Malformed(_) => 2,
        Error::Json(_) | Error::Io(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(64);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}
