//! `tero`: preprocess, train, evaluate and query temporal KG embeddings.
//!
//! Exit status is 0 on success, 1 for usage errors, 2 for data errors and
//! 3 for numerical failures during training.

mod commands;
mod error;
mod settings;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{EvalOptions, PredictQuery, QuerySide, Ties};
use error::{CliError, EXIT_OK, EXIT_USAGE};
use settings::{RunConfig, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "tero",
    version,
    about = "Temporal knowledge graph embeddings by rotation in complex space",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the vocabulary and time binning and print dataset statistics
    Preprocess {
        #[command(flatten)]
        settings: Settings,
    },
    /// Train a model and write the best checkpoint and a validation log
    Train {
        #[command(flatten)]
        settings: Settings,
    },
    /// Time-wise filtered MRR and Hits@1/3/10 of a checkpoint on --test
    Eval {
        #[command(flatten)]
        settings: Settings,
        /// How candidates tied with the answer are counted
        #[arg(long, value_enum, default_value = "mean")]
        ties: Ties,
        /// Report path [default: <out-dir>/eval.tsv]
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write every query's rank to this TSV file
        #[arg(long)]
        ranks: Option<PathBuf>,
    },
    /// Rank completions of a single query
    Predict {
        #[command(flatten)]
        settings: Settings,
        /// The known entity of the query
        #[arg(long)]
        entity: String,
        #[arg(long)]
        relation: String,
        /// Query date, or the beginning of an interval (`YYYY-MM-DD`, `#` for unknown digits)
        #[arg(long)]
        time: String,
        /// End of an interval query
        #[arg(long)]
        time_end: Option<String>,
        /// Which slot to fill
        #[arg(long, value_enum, default_value = "object")]
        side: QuerySide,
        /// Number of entities to print
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

fn resolve(settings: Settings) -> Result<RunConfig, CliError> {
    let run = settings.resolve()?;
    if run.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(run.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(run)
}

fn run(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Preprocess { settings } => commands::preprocess(&resolve(settings)?, out),
        Command::Train { settings } => commands::train(&resolve(settings)?, out),
        Command::Eval {
            settings,
            ties,
            report,
            ranks,
        } => {
            let opts = EvalOptions {
                ties,
                report,
                ranks,
            };
            commands::eval(&resolve(settings)?, &opts, out).map(|_| ())
        }
        Command::Predict {
            settings,
            entity,
            relation,
            time,
            time_end,
            side,
            top,
        } => {
            let query = PredictQuery {
                entity,
                relation,
                time,
                time_end,
                side,
                top,
            };
            commands::predict(&resolve(settings)?, &query, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
