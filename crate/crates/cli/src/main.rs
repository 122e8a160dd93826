//! `kgforge`: build a medical knowledge graph from a term list or document.

mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};

use config::{Flags, Settings};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "kgforge",
    version,
    about = "Medical knowledge-graph builder",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Ingest and filter concepts; write unenriched clusters.
    Extract,
    /// Add ontology synonyms and definitions to a concept file.
    Enrich,
    /// Run the whole pipeline and write Cypher.
    Build,
    /// Build the graph from a concept file, run completion, write Cypher.
    Complete,
    /// Score a graph against annotated concept pairs.
    Eval,
    /// List the texts completion will ask the embedding provider for.
    Texts,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let s = Settings::from_flags(&cli.flags)?;
    match cli.command {
        Command::Extract => commands::extract(&s),
        Command::Enrich => commands::enrich_cmd(&s),
        Command::Build => commands::build(&s),
        Command::Complete => commands::complete_cmd(&s),
        Command::Eval => commands::eval(&s),
        Command::Texts => commands::texts(&s),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
