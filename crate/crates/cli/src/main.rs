//! `multischmidt` command-line tool.
//!
//! Every command writes JSON to stdout (or `--out`) and a short human summary
//! to stderr unless `--quiet` is given. Exit codes: 0 success, 1 usage or I/O
//! error, 2 mathematical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "multischmidt", version, about = "Canonical forms of multipartite pure states under local unitaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// State file to read.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Starts for unconstrained maximizations (default 16 · max dimension).
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    /// Tolerance for the canonical-form conditions.
    #[arg(long, global = true, default_value_t = multischmidt::config::CONDITION_TOL)]
    pub tol: f64,
    /// Rescale a non-normalized input instead of rejecting it.
    #[arg(long, global = true)]
    pub normalize: bool,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Comma-separated dimensions, e.g. 2,2,3.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Accept states with fewer than three nontrivial modes.
    #[arg(long, global = true)]
    pub bipartite_fallback: bool,
    /// Logarithm base used when displaying entropies.
    #[arg(long, global = true, value_enum, default_value_t = LogBase::E)]
    pub log_base: LogBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBase {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
}

impl LogBase {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
            LogBase::Ten => nats / std::f64::consts::LN_10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AltForm {
    /// Eigenbases of the single-mode reduced density matrices.
    Marginal,
    /// Two-mode Schmidt form.
    Schmidt,
    /// Local basis found by entropy descent.
    MinEntropy,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical form and the local unitaries that produce it.
    Canonicalize {
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Check the canonical-form conditions on a coefficient tensor.
    Check {
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Constrained-coefficient counts and orbit dimensions for a shape.
    Orbit {
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Marginal-eigenbasis, Schmidt or minimum-entropy form.
    Altform {
        #[arg(long, value_enum, default_value_t = AltForm::Marginal)]
        form: AltForm,
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Ingarden-Urbanik entropy, optionally minimized over local unitaries.
    Entropy {
        /// Also run the entropy descent.
        #[arg(long)]
        descend: bool,
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Stationary product states of a|000⟩ + b|011⟩ + c|111⟩ (default: the built-in example).
    Appendix {
        /// Evaluate the quadratic at this |v1|² as well.
        #[arg(long)]
        v1sq: Option<f64>,
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Sampled maximal product overlap, next to the multistart value.
    BruteForce {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Haar-random state of the given dimensions.
    Random {
        #[command(flatten)]
        cfg: RunConfig,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Canonicalize { cfg } => commands::canonicalize(&cfg),
        Command::Check { cfg } => commands::check(&cfg),
        Command::Orbit { cfg } => commands::orbit(&cfg),
        Command::Altform { form, cfg } => commands::altform(&cfg, form),
        Command::Entropy { descend, cfg } => commands::entropy(&cfg, descend),
        Command::Appendix { v1sq, cfg } => commands::appendix(&cfg, v1sq),
        Command::BruteForce { samples, cfg } => commands::brute_force(&cfg, samples),
        Command::Random { cfg } => commands::random(&cfg),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code.into()
        }
    }
}
