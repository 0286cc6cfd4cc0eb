//! `gchs`: batch driver for dataset generation, attacks, training, η
//! sweeps, evaluation, and gradient checks.
//!
//! Every command accepts `--config FILE` with `key=value` lines whose keys
//! are the long flag names (dashes or underscores). Flags override the file.
//! Commands that write outputs echo their resolved settings to
//! `<out>/resolved-config.txt`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gchs_core::encoder::OutputActivation;
use gchs_core::sanitizer::MaskLaw;
use gchs_core::trainer::Mode;

#[derive(Debug, Parser)]
#[command(name = "gchs", version, about = "Graph contrastive learning with a learned sanitation view")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a stochastic block model and write it to disk.
    Generate(GenerateArgs),
    /// Poison a labeled graph and write it with an audit of the edits.
    Attack(AttackArgs),
    /// Train one model and export history, embeddings, and a report.
    Train(TrainArgs),
    /// Train one model per η and select by pseudo normalized cut.
    Sweep(SweepArgs),
    /// Score embeddings against labels, or compute GRV for a graph pair.
    Eval(EvalArgs),
    /// Check the objective's gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// `key=value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed; component seeds are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SbmArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of blocks.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p_intra: Option<f64>,
    #[arg(long)]
    pub p_inter: Option<f64>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    /// Distance between any two class means.
    #[arg(long)]
    pub mean_sep: Option<f64>,
}

/// Dataset source: a directory written by `generate`/`attack`, or a fresh
/// SBM sample.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding `edges.txt`, `features.csv`, optional `labels.txt`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Sample the dataset from the SBM settings instead.
    #[arg(long)]
    pub sbm: bool,
    #[command(flatten)]
    pub sbm_args: SbmArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// full | no_info | no_delta | baseline
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Step size of the projected update on the edge probabilities.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tau_info: Option<f64>,
    #[arg(long)]
    pub tau_g: Option<f64>,
    #[arg(long)]
    pub p_drop: Option<f64>,
    /// Sanitation budget ε; defaults to 0.1·|E|.
    #[arg(long)]
    pub budget: Option<f64>,
    /// gumbel | logistic
    #[arg(long)]
    pub mask_law: Option<MaskLaw>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub out_dim: Option<usize>,
    /// relu | linear
    #[arg(long)]
    pub output: Option<OutputActivation>,
    #[arg(long)]
    pub pnc_window: Option<usize>,
    #[arg(long)]
    pub no_info_p_epochs: Option<usize>,
    /// Set to false to replace the sanitation view by a random view.
    #[arg(long)]
    pub sanitizer: Option<bool>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sbm: SbmArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    /// heterophily | clga
    #[arg(long)]
    pub kind: Option<String>,
    /// Fraction of |E| to edit, in (0, 1].
    #[arg(long)]
    pub power: Option<f64>,
    /// Surrogate settings of the clga attacker.
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated η values; defaults to 0,0.0001,0.001,0.01,0.1,1,3,5.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Embedding matrix written by `train`.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// One label per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Report logistic-regression test accuracy.
    #[arg(long)]
    pub accuracy: bool,
    /// Report k-means NMI with k = number of classes.
    #[arg(long)]
    pub nmi: bool,
    /// Dataset whose homophily is reported.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Clean dataset directory of a GRV pair.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Poisoned dataset directory of a GRV pair.
    #[arg(long)]
    pub poisoned: Option<PathBuf>,
    /// View pairs averaged by the mutual-information estimate.
    #[arg(long)]
    pub mi_samples: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory receiving `report.json`; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Attack(a) => commands::attack(a),
        Command::Train(a) => commands::train(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Eval(a) => commands::eval(a),
        Command::Gradcheck(a) => commands::gradcheck(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
