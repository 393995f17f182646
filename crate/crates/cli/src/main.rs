//! `itmlab` command-line front-end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itmlab::numeric::{default_precision, set_default_precision};
use itmlab::{ItmError, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFINITE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;
const EXIT_FAILURE: u8 = 1;

const PRECISION_ENV: &str = "ITMLAB_PRECISION_BITS";

#[derive(Parser, Debug)]
#[command(name = "itmlab", version, about = "Interval translation maps on three intervals")]
pub struct Cli {
    /// Arithmetic: `exact`, `float` (precision from ITMLAB_PRECISION_BITS) or `float:<bits>`.
    #[arg(long, global = true, default_value = "exact", value_parser = parse_mode)]
    pub mode: Mode,
    /// Write the report (or image) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether (α, β) is of finite type.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Maximum number of Gauss-map steps.
        #[arg(long = "max-iters", visible_alias = "budget", default_value_t = 1000)]
        budget: usize,
    },
    /// Render the parameter set to a PGM image.
    Render(RenderArgs),
    /// Estimate the fraction of U that is of finite type.
    Survey {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long = "max-iters", visible_alias = "budget", default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Box-dimension upper bound at a fixed point of the Gauss map.
    Dimension {
        /// The symbol k of the constant sequence.
        #[arg(long = "constant-k", default_value_t = 3)]
        k: u64,
        #[arg(long, visible_alias = "max-iters", default_value_t = itmlab::dimension::DEFAULT_DEPTH)]
        depth: usize,
        /// Also write the per-depth series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Unique-ergodicity report for a symbol sequence.
    Ue {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, visible_alias = "max-iters", default_value_t = 60)]
        depth: usize,
        /// Also write the per-depth triangle diameters as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Symbolic coding: the chain word of a symbol sequence.
    Code {
        /// Code the fixed point (r_k, r_k²) and cross-check the numeric itinerary.
        #[arg(long = "fixed-point", conflicts_with_all = ["generator", "ks"])]
        fixed_point: Option<u64>,
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        /// Number of symbols taken from the sequence.
        #[arg(long = "max-iters", default_value_t = 64)]
        symbols: usize,
    },
    /// Iterate Ω_{n+1} = T(Ω_n) from Ω_0 = [0, 1).
    Attractor {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "max-iters", default_value_t = 50)]
        n_max: usize,
        #[arg(long, default_value_t = itmlab::interval_set::DEFAULT_COMPONENT_CAP)]
        component_cap: usize,
    },
    /// Orbit of a point under T.
    Orbit {
        #[command(flatten)]
        params: ParamArgs,
        /// Starting point in [0, 1].
        #[arg(long, default_value = "0")]
        x0: String,
        #[arg(long = "max-iters", default_value_t = 20)]
        n: usize,
    },
}

/// Either explicit parameters or a Gauss-map fixed point.
#[derive(Args, Debug)]
pub struct ParamArgs {
    /// α as `p/q`, an integer or a decimal.
    #[arg(allow_hyphen_values = true, required_unless_present = "fixed_point")]
    pub alpha: Option<String>,
    #[arg(allow_hyphen_values = true, required_unless_present = "fixed_point")]
    pub beta: Option<String>,
    /// Use (r_k, r_k²), the fixed point of the Gauss map in cell k.
    #[arg(long = "fixed-point", conflicts_with_all = ["alpha", "beta"])]
    pub fixed_point: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SeqArgs {
    /// Closed-form generator, e.g. `k_i=i+1`, `constant:3`, `geom:2,2`.
    #[arg(long, conflicts_with = "ks")]
    pub generator: Option<String>,
    /// Explicit comma-separated symbols.
    #[arg(long)]
    pub ks: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RenderKind {
    Escape,
    Ifs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PaletteArg {
    Linear,
    Log,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long, default_value_t = 100)]
    pub width: usize,
    #[arg(long, default_value_t = 100)]
    pub height: usize,
    #[arg(long, value_enum, default_value_t = RenderKind::Escape)]
    pub kind: RenderKind,
    /// Escape-time budget.
    #[arg(long = "max-iters", default_value_t = 50)]
    pub max_iters: usize,
    /// Inverse-IFS depth.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// `alpha_min,alpha_max,beta_min,beta_max`.
    #[arg(long)]
    pub viewport: Option<String>,
    #[arg(long, value_enum, default_value_t = PaletteArg::Linear)]
    pub palette: PaletteArg,
    #[arg(long, default_value_t = itmlab::render::DEFAULT_NODE_CAP)]
    pub node_cap: usize,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    if s == "float" {
        return Ok(Mode::Float(default_precision()));
    }
    Mode::parse(s).ok_or_else(|| format!("expected `exact`, `float` or `float:<bits>` (bits >= 16), got {s:?}"))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<ItmError> for CliError {
    fn from(e: ItmError) -> Self {
        let code = match e {
            ItmError::Io(_) => EXIT_IO,
            ItmError::Parse(_)
            | ItmError::InvalidArgument(_)
            | ItmError::InvalidParams { .. }
            | ItmError::OutOfDomain(_)
            | ItmError::NotInInterior { .. }
            | ItmError::Precondition(_)
            | ItmError::PrefixExhausted { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_IO, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var(PRECISION_ENV) {
        match v.parse::<u32>() {
            Ok(bits) if bits >= 16 => {
                set_default_precision(bits);
            }
            _ => {
                eprintln!("itmlab: {PRECISION_ENV} must be an integer >= 16, got {v:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("itmlab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
