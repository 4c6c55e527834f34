use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use newsfair_cli::{Overrides, PipelineConfig, Stage, StageError, Workspace};
use newsfair_core::Rule;

/// Voting-rule news recommendation with satisfaction and bias audits.
///
/// Artifacts go to `<out>/run-<config hash>/`. Without input paths in the
/// config, `synth` provides the data.
#[derive(Debug, Parser)]
#[command(name = "newsfair", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML pipeline config; defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Restrict elect/evaluate/report to these rules (repeatable or comma separated).
    #[arg(long, global = true, value_name = "NAME", value_delimiter = ',')]
    rule: Vec<Rule>,

    /// Committee size.
    #[arg(long, global = true, value_name = "INT")]
    kappa: Option<usize>,

    /// Seed for every random choice in the pipeline.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Parent directory for run directories.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// All stages, printing the results table.
    Run,
    /// Generate synthetic events, articles and press corpora.
    Synth,
    /// Validate events and article bodies.
    Ingest,
    /// Active time to per-user scores.
    Score,
    /// Complete the score matrix.
    Factorize,
    /// Elect one committee per rule.
    Elect,
    /// Build the seed lexicon from the two press corpora.
    Lexicon,
    /// Label platform articles with the lexicon.
    Label,
    /// Satisfaction and bias of every committee.
    Evaluate,
    /// Write the results table as Markdown and CSV.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), StageError> {
    let config_error =
        |msg: String| StageError::new(Stage::Config, newsfair_cli::Failure::Config(msg));
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(config_error)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(&Overrides {
        kappa: cli.kappa,
        seed: cli.seed,
        out: cli.out.clone(),
    })
    .map_err(config_error)?;

    let ws = Workspace::open(cfg)?;
    log::info!("run directory {}", ws.dir().display());
    let only = &cli.rule;
    match cli.command {
        Command::Run => {
            ws.run(only)?;
            print_table(&ws)?;
        }
        Command::Synth => ws.synth()?,
        Command::Ingest => ws.ingest()?,
        Command::Score => ws.score()?,
        Command::Factorize => ws.factorize()?,
        Command::Elect => {
            ws.elect(only)?;
        }
        Command::Lexicon => {
            ws.lexicon()?;
        }
        Command::Label => ws.label()?,
        Command::Evaluate => {
            ws.evaluate(only)?;
        }
        Command::Report => {
            ws.report(only)?;
            print_table(&ws)?;
        }
    }
    Ok(())
}

fn print_table(ws: &Workspace) -> Result<(), StageError> {
    let path = ws.path(newsfair_cli::pipeline::REPORT_MD);
    let table = std::fs::read_to_string(&path).map_err(|source| {
        StageError::new(Stage::Report, newsfair_cli::Failure::Io { path, source })
    })?;
    print!("{table}");
    Ok(())
}
