//! Command-line front end: argument parsing, exit-code policy and thin
//! adapters over the `maxgrowth` library.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxgrowth::numerics::{parse_rational, rational_from_f64, DEFAULT_MANTISSA_BITS};
use maxgrowth::{BigRational, Family};

/// Environment variable naming the default directory for output files.
pub const OUT_DIR_ENV: &str = "MAXGROWTH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "maxgrowth",
    version,
    about = "Maximal-growth matrices and perturbed last pivots"
)]
pub struct Cli {
    /// Worker threads for parallel scans (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance, validate it and write its matrix file.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Rational)]
        format: MatrixFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Factor a matrix and print its pivots, growth factor and row exchanges.
    Factor {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Eliminate without pivoting instead of with partial pivoting.
        #[arg(long)]
        no_pivoting: bool,
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Last pivot after perturbing one entry, cross-checked against elimination.
    Perturb {
        #[command(flatten)]
        instance: InstanceArgs,
        /// 1-based row of the perturbed entry.
        #[arg(long)]
        i: usize,
        /// 1-based column of the perturbed entry.
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Scan every entry and write the grid of log10 |perturbed last pivot|.
    Heatmap {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a gnuplot script plotting the grid.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Solve perturbed systems with GENP in binary64 and write per-trial records.
    SolveExp {
        #[arg(long, default_value = "wilkinson")]
        family: Family,
        #[arg(long, value_delimiter = ',', default_values_t = maxgrowth::experiments::DEFAULT_N_LIST)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 11)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the top-right and condition-number bounds and print a table.
    Verify {
        #[arg(long, default_value = "random-triu")]
        family: Family,
        #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
        n_list: Vec<usize>,
        /// Instances per size (seeds 0, 1, ...).
        #[arg(long, default_value_t = 25)]
        instances: u64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1e-1, 1e-4, 1e-8])]
        eps_list: Vec<f64>,
        /// Largest size for the condition-number suite, which checks every entry.
        #[arg(long, default_value_t = 16)]
        cond_max_n: usize,
        /// Check a single matrix file instead of generated instances.
        #[arg(long, conflicts_with_all = ["n_list", "instances"])]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, default_value = "wilkinson")]
    pub family: Family,
    #[arg(long, required_unless_present = "input")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep a random Û as drawn instead of rescaling it into the valid region.
    #[arg(long)]
    pub no_enforce: bool,
    /// Read a matrix file instead of generating one.
    #[arg(long, conflicts_with = "n")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EpsArgs {
    /// Perturbation as a decimal, read as binary64 and promoted exactly.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Perturbation as an exact rational `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_rational: Option<String>,
}

impl EpsArgs {
    pub fn value(&self) -> Result<BigRational, UsageError> {
        match (&self.eps, &self.eps_rational) {
            (Some(v), _) if !v.is_finite() => {
                Err(UsageError(format!("--eps must be finite, got {v}")))
            }
            (Some(v), _) => Ok(rational_from_f64(*v)),
            (None, Some(s)) => {
                parse_rational(s).map_err(|e| UsageError(format!("--eps-rational: {e}")))
            }
            (None, None) => Err(UsageError(
                "one of --eps or --eps-rational is required".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeKind {
    Exact,
    Bigfloat,
    Binary64,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long, value_enum, default_value_t = RegimeKind::Exact)]
    pub regime: RegimeKind,
    /// Mantissa bits for the bigfloat regime.
    #[arg(long, default_value_t = DEFAULT_MANTISSA_BITS)]
    pub bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Rational,
    Binary64,
}

/// A semantically invalid invocation; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<maxgrowth::Error>() {
        Some(
            maxgrowth::Error::IndexOutOfRange { .. }
            | maxgrowth::Error::InvalidDimension { .. }
            | maxgrowth::Error::InvalidPrecision { .. },
        ) => 2,
        _ => 1,
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
///
/// Exit status: 0 on success, 1 when a validation or check fails, 2 on a
/// usage error.
pub fn run<I, S>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
