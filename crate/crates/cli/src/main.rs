//! vulncure: NVD data-quality pipeline over a workspace directory.

mod commands;
mod config;
mod manifest;
mod sidecar;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CmdError, CorpusChoice};
use config::WorkspaceConfig;

#[derive(Parser)]
#[command(name = "vulncure", version)]
#[command(about = "Detect and repair NVD data inconsistencies, then regenerate analyses")]
struct Cli {
    /// Workspace configuration file.
    #[arg(long, global = true, default_value = "vulncure.conf")]
    config: PathBuf,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the NVD feed files into the raw corpus snapshot.
    Ingest,
    /// Estimate disclosure dates from stored reference pages.
    EstimateDates,
    /// Flag likely-matching vendor/product name pairs into a worksheet.
    NameCandidates,
    /// Build the name mapping from decisions and rewrite the corpus.
    NameApply,
    /// Recover CWE ids from descriptions and merge them into records.
    ExtractCwe {
        /// Which corpus snapshot to read (default: corrected if present).
        #[arg(long, value_enum)]
        corpus: Option<CorpusChoice>,
    },
    /// Train the severity regressor on dual-scored records.
    TrainSeverity {
        #[arg(long, value_enum)]
        corpus: Option<CorpusChoice>,
    },
    /// Predict v3 assessments for records that only have v2.
    BackfillV3 {
        #[arg(long, value_enum)]
        corpus: Option<CorpusChoice>,
    },
    /// Generate the case-study reports for raw and corrected corpora.
    Report,
    /// Run every stage in order.
    Pipeline,
}

fn run(cli: Cli) -> commands::CmdResult {
    let mut config = WorkspaceConfig::load(&cli.config).map_err(CmdError::Data)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.entries.insert("run.seed".to_string(), seed.to_string());
    }
    match cli.command {
        Command::Ingest => commands::cmd_ingest(&config),
        Command::EstimateDates => commands::cmd_estimate_dates(&config),
        Command::NameCandidates => commands::cmd_name_candidates(&config),
        Command::NameApply => commands::cmd_name_apply(&config),
        Command::ExtractCwe { corpus } => commands::cmd_extract_cwe(&config, corpus),
        Command::TrainSeverity { corpus } => commands::cmd_train_severity(&config, corpus),
        Command::BackfillV3 { corpus } => commands::cmd_backfill(&config, corpus),
        Command::Report => commands::cmd_report(&config),
        Command::Pipeline => commands::cmd_pipeline(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::MissingPrerequisite(what)) => {
            eprintln!("error: missing prerequisite: {what}");
            ExitCode::from(2)
        }
        Err(CmdError::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
