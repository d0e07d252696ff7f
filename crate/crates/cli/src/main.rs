mod audio;
mod cli;
mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};
use config::FileConfig;

/// Bad invocation: a missing required setting or an invalid value.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_TRAINING: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<deepvoc_core::Error>() {
            return match e {
                deepvoc_core::Error::Config(_) => EXIT_USAGE,
                deepvoc_core::Error::TrainingDiverged { .. } => EXIT_TRAINING,
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::TrainDae(a) => commands::train_dae_cmd(a, &file),
        Command::TrainCodebook(a) => commands::train_codebook_cmd(a, &file),
        Command::Encode(a) => commands::encode_cmd(a, &file),
        Command::Decode(a) => commands::decode_cmd(a, &file),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Info(a) => commands::info_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
