use clap::{Parser, Subcommand};
use feedforge::config::PipelineConfig;
use feedforge::pipeline::{self, PipelineError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "feedforge",
    version,
    about = "Synthesizes radial distribution feeders from street networks"
)]
struct Cli {
    /// Print per-stage wall times to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline: ingest, synth, electrify, pf, report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for all artifacts.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and simplify the street network into a candidate graph.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the feeder synthesis problem on an ingested candidate graph.
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding candidate.json.
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach line parameters and loads to a synthesized feeder.
    Electrify {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding feeder.json.
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run scenario power flows on an electrified network.
    Pf {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding network.json.
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render report artifacts from the staged documents.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding street.json, feeder.json, network.json, and
        /// pf_results.json.
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<PipelineConfig, PipelineError> {
    PipelineConfig::load(path).map_err(|e| PipelineError::Config(e.0))
}

fn dispatch(cli: Cli) -> Result<i32, PipelineError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let outcome = pipeline::run_pipeline(&cfg, &out, cli.verbose)?;
            print!("{}", outcome.summary_table);
            Ok(outcome.exit_code)
        }
        Command::Ingest { config, out } => {
            let cfg = load_config(&config)?;
            pipeline::cmd_ingest(&cfg, &out)?;
            Ok(0)
        }
        Command::Synth { config, r#in, out } => {
            let cfg = load_config(&config)?;
            pipeline::cmd_synth(&cfg, &r#in, &out)
        }
        Command::Electrify { config, r#in, out } => {
            let cfg = load_config(&config)?;
            pipeline::cmd_electrify(&cfg, &r#in, &out)?;
            Ok(0)
        }
        Command::Pf { config, r#in, out } => {
            let cfg = load_config(&config)?;
            pipeline::cmd_pf(&cfg, &r#in, &out)?;
            Ok(0)
        }
        Command::Report { config, r#in, out } => {
            let cfg = load_config(&config)?;
            let table = pipeline::cmd_report(&cfg, &r#in, &out)?;
            print!("{table}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
