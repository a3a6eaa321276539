use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opinion_cli::config::{parse_formats, Overrides, PipelineConfig, ReportFormat};
use opinion_cli::error::{CliError, Result, Stage};
use opinion_cli::{bench, pipeline};
use opinion_core::synthetic::synthetic_tweets;

#[derive(Parser)]
#[command(
    name = "opinion",
    version,
    about = "Issue-level opinion mining over candidate tweets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run stages end to end.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
    /// Load documents, match candidates and clean tokens.
    Ingest(StageArgs),
    /// Label ingested documents with the sentiment lexicon.
    Sentiment(StageArgs),
    /// Train one topic model per candidate and polarity.
    Topics(StageArgs),
    /// Map topics to economic issues.
    Issues(StageArgs),
    /// Compute DPNT scores and compare with the survey.
    Report(StageArgs),
    /// Write a synthetic tweet corpus as JSONL.
    Generate {
        #[arg(long, default_value_t = 2000)]
        docs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure sentiment and Gibbs throughput on synthetic data.
    Bench {
        #[arg(long, default_value_t = 20000)]
        docs: usize,
        #[arg(long, default_value_t = 20)]
        topics: usize,
        #[arg(long, default_value_t = 20)]
        sweeps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum PipelineAction {
    Run(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Topics per partition.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    dedup: bool,
    #[arg(long)]
    drop_query_terms: bool,
    /// Comma-separated report formats: md, json, csv.
    #[arg(long)]
    format: Option<String>,
}

impl StageArgs {
    fn load(&self) -> Result<(PipelineConfig, Overrides)> {
        let formats: Option<Vec<ReportFormat>> = self.format.as_deref().map(parse_formats).transpose()?;
        let overrides = Overrides {
            seed: self.seed,
            k: self.k,
            out_dir: self.out_dir.clone(),
            dedup: self.dedup,
            drop_query_terms: self.drop_query_terms,
            formats,
        };
        let mut cfg = PipelineConfig::load(&self.config)?;
        cfg.apply(&overrides);
        cfg.validate()?;
        Ok((cfg, overrides))
    }
}

fn run_one(args: &StageArgs, stage: Stage) -> Result<()> {
    let (cfg, overrides) = args.load()?;
    pipeline::run_stage(&cfg, stage, &overrides)?;
    log::info!("{stage} complete; artifacts in {}", cfg.out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline {
            action: PipelineAction::Run(args),
        } => {
            let (cfg, overrides) = args.load()?;
            let manifest = pipeline::run_pipeline(&cfg, &overrides)?;
            let md = pipeline::report_file(&cfg.out_dir, ReportFormat::Md);
            if md.is_file() {
                let text = std::fs::read_to_string(&md).map_err(|e| CliError::io(&md, e))?;
                print!("{text}");
            }
            log::info!("pipeline complete = {}", manifest.complete);
            Ok(())
        }
        Command::Ingest(a) => run_one(&a, Stage::Ingest),
        Command::Sentiment(a) => run_one(&a, Stage::Sentiment),
        Command::Topics(a) => run_one(&a, Stage::Topics),
        Command::Issues(a) => run_one(&a, Stage::Issues),
        Command::Report(a) => run_one(&a, Stage::Report),
        Command::Generate { docs, seed, out } => {
            let docs = synthetic_tweets(docs, seed);
            let mut text = String::new();
            for d in &docs {
                text.push_str(&serde_json::to_string(d).expect("document serializes"));
                text.push('\n');
            }
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(path, e)),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::io("<stdout>", e)),
            }
        }
        Command::Bench {
            docs,
            topics,
            sweeps,
            seed,
        } => {
            let r = bench::run(docs, topics, sweeps, seed);
            println!("{}", serde_json::to_string_pretty(&r).expect("bench serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
