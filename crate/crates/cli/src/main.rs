//! `pulie`: deception-detection experiments over strategic-dialogue
//! corpora, from ingestion through PU training to ablation reports.

mod artifacts;
mod commands;
mod config;
mod context;
mod errors;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::embed::EmbedMode;
use commands::predict::PredictFormat;
use config::{ExperimentConfig, Overrides};
use errors::CliError;
use pulie_core::trainer::Objective;

fn parse_objective(s: &str) -> Result<Objective, String> {
    match s {
        "pu" => Ok(Objective::Pu),
        "bce" => Ok(Objective::Bce),
        "weighted-bce" => Ok(Objective::WeightedBce),
        "oversampled-bce" => Ok(Objective::OversampledBce),
        other => Err(format!(
            "unknown objective `{other}` (expected pu, bce, weighted-bce, or oversampled-bce)"
        )),
    }
}

/// Deception detection over strategic-dialogue messages with
/// positive-unlabeled training. Flags override configuration-file keys,
/// which override built-in defaults.
#[derive(Parser)]
#[command(name = "pulie", version, about)]
struct Cli {
    /// Experiment configuration file (TOML).
    #[arg(short, long, global = true, default_value = "pulie.toml")]
    config: PathBuf,
    /// Override paths.output_dir.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override paths.corpus.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Override paths.embeddings.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Override paths.lexicons.
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,
    /// Override train.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override train.epochs.
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Override train.objective (pu, bce, weighted-bce, oversampled-bce).
    #[arg(long, global = true, value_parser = parse_objective)]
    objective: Option<Objective>,
    /// Override pu.prior.
    #[arg(long, global = true)]
    prior: Option<f64>,
    /// Force corpus.invert_labels = true (swap the lie/truth convention).
    #[arg(long, global = true)]
    invert_labels: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the dialog corpus, flatten it, and write split files,
    /// per-message features, and corpus statistics.
    Ingest,
    /// Build the binary embedding store over the flattened corpus.
    Embed {
        /// hash: seeded feature hashing; import: external encoder matrix.
        #[arg(long, value_enum, default_value_t = EmbedMode::Hash)]
        mode: EmbedMode,
    },
    /// Train the classifier and write checkpoint, metadata, and history.
    Train,
    /// Tune the threshold on validation and report frozen-threshold
    /// metrics on the test split.
    Eval {
        /// Skip tuning and evaluate at this fixed threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Dump the validation PR curve and the selected threshold.
    TuneThreshold,
    /// Score new messages with a trained checkpoint.
    Predict {
        /// Input file: raw lines or flattened records.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = PredictFormat::Lines)]
        format: PredictFormat,
        /// Destination (defaults to <output_dir>/predictions.jsonl).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare all training objectives and the TF-IDF baseline across the
    /// configured seeds.
    Ablate,
    /// Re-render previously produced results.
    Report,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        corpus: cli.corpus.clone(),
        embeddings: cli.embeddings.clone(),
        lexicons: cli.lexicons.clone(),
        output_dir: cli.output_dir.clone(),
        seed: cli.seed,
        epochs: cli.epochs,
        objective: cli.objective,
        prior: cli.prior,
        invert_labels: cli.invert_labels,
    };
    let config = ExperimentConfig::load(&cli.config, &overrides)?;
    match cli.command {
        Command::Ingest => commands::ingest::run(&config),
        Command::Embed { mode } => commands::embed::run(&config, mode),
        Command::Train => commands::train::run(&config),
        Command::Eval { threshold } => commands::eval::run(&config, threshold),
        Command::TuneThreshold => commands::tune::run(&config),
        Command::Predict {
            input,
            format,
            output,
        } => commands::predict::run(&config, &input, format, output),
        Command::Ablate => commands::ablate::run(&config),
        Command::Report => commands::report::run(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
