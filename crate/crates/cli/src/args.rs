use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nndisp", version, about = "Dispersion of nearest-neighbor decoding with Gaussian codebooks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity, dispersion and normal-approximation log M.
    Approx(ApproxArgs),
    /// Monte Carlo estimate of the ensemble error probability.
    Simulate(SimulateArgs),
    /// Same as `simulate`; meant for runs with `--interferers`.
    Interfere(SimulateArgs),
    /// Table of closed forms (and optional estimates) over one variable.
    Sweep(SweepArgs),
    /// Kolmogorov distance of the standardized decoding statistic.
    CltCheck(CltArgs),
    /// Frequencies of leaving the typical set of empirical powers.
    DiagTypical(DiagArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodebookChoice {
    Shell,
    Iid,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingleCodebook {
    Shell,
    Iid,
}

impl SingleCodebook {
    pub fn name(self) -> &'static str {
        match self {
            Self::Shell => "shell",
            Self::Iid => "iid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Semi,
    Brute,
}

/// Channel description shared by every command.
#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Intended sender power P (P₁ with interferers).
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    /// Interferer powers, e.g. "1,1,0.5".
    #[arg(long)]
    pub interferers: Option<String>,
    /// Codebook class of the interferers.
    #[arg(long, value_enum, default_value_t = SingleCodebook::Shell)]
    pub interferer_codebook: SingleCodebook,
    /// Built-in noise law: gaussian, laplace, rademacher or uniform.
    #[arg(long, default_value = "gaussian", conflicts_with = "noise_table")]
    pub noise: String,
    /// JSON file with a list of [value, probability] pairs.
    #[arg(long)]
    pub noise_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = CodebookChoice::Shell)]
    pub codebook: CodebookChoice,
    /// Blocklength.
    #[arg(long)]
    pub n: usize,
    /// Target error probability.
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("size").required(true).args(["logm", "rate", "eps"]))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = SingleCodebook::Shell)]
    pub codebook: SingleCodebook,
    #[arg(long)]
    pub n: usize,
    /// Codebook size as ln M (log2 M with --bits).
    #[arg(long)]
    pub logm: Option<f64>,
    /// Rate per channel use; log M = n·rate.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Pick log M from the normal approximation at this error probability.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Semi)]
    pub method: MethodChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = SingleCodebook::Shell)]
    pub codebook: SingleCodebook,
    /// Swept variable: n, eps, power or num_interferers.
    #[arg(long)]
    pub var: String,
    /// Comma-separated values or an inclusive integer range "a..b".
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Monte Carlo trials per row; 0 skips simulation.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Semi)]
    pub method: MethodChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Blocklengths, e.g. "100,1000,10000".
    #[arg(long, default_value = "100,1000,10000")]
    pub n_values: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiagArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub n: usize,
    /// Margin of the last typical-set condition; defaults to P.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
