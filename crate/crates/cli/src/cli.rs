use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Deep-autoencoder speech codec at 2400 and 1200 bit/s.
#[derive(Debug, Parser)]
#[command(name = "deepvoc", version, about)]
pub struct Cli {
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the autoencoder on a directory of 8 kHz mono WAV files.
    TrainDae(TrainDaeArgs),
    /// Train split VQ codebooks on the latents of a trained model.
    TrainCodebook(TrainCodebookArgs),
    /// Encode a WAV file into a .dvoc stream.
    Encode(EncodeArgs),
    /// Decode a .dvoc stream into a WAV file.
    Decode(DecodeArgs),
    /// Score test WAV files against references with matching names.
    Evaluate(EvaluateArgs),
    /// Print the header of a .dvoc stream.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct TrainDaeArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Bit rate, 2400 or 1200.
    #[arg(long)]
    pub mode: Option<u32>,
    /// Encoder hidden widths, e.g. 256,256,128,128 (the decoder mirrors them).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub arch: Option<Vec<usize>>,
    /// Fine-tuning epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub minibatch: Option<usize>,
    /// Initial fine-tuning learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Per-epoch decrement of the fine-tuning learning rate.
    #[arg(long)]
    pub lr_decrement: Option<f64>,
    #[arg(long)]
    pub pretrain_lr: Option<f64>,
    #[arg(long)]
    pub skip_pretrain: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainCodebookArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long)]
    pub mode: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lloyd iterations per codebook size.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub split_perturbation: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, short, value_name = "WAV")]
    pub input: PathBuf,
    #[arg(long, short, value_name = "DVOC")]
    pub output: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub codebook: Option<PathBuf>,
    /// Defaults to the rate implied by the model's latent width.
    #[arg(long)]
    pub mode: Option<u32>,
    /// Candidates kept per split in the closed-loop search.
    #[arg(short = 'j', long = "candidates")]
    pub j: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, short, value_name = "DVOC")]
    pub input: PathBuf,
    #[arg(long, short, value_name = "WAV")]
    pub output: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub codebook: Option<PathBuf>,
    /// Griffin-Lim iterations.
    #[arg(long)]
    pub gl_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "DIR")]
    pub reference: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub test: PathBuf,
    /// CSV destination; standard output when omitted.
    #[arg(long, short, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(value_name = "DVOC")]
    pub file: PathBuf,
}
