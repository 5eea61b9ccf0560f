//! `cag`: generate event articles from videos and evaluate them.

mod backend;
mod config;
mod evaluate;
mod generate;
mod inspect;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigInvalid, Grounding};

#[derive(Parser)]
#[command(
    name = "cag",
    version,
    about = "Generate and evaluate articles about events from their videos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one article per event with the chosen method.
    Generate(GenerateArgs),
    /// Score run artifacts against the reference articles.
    Evaluate(EvaluateArgs),
    /// Corpus statistics and annotator agreement.
    Stats(StatsArgs),
    /// nDCG@k of a ranked run.
    Ndcg(NdcgArgs),
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    /// Corpus root holding events.json, videos.json and subclaims.json.
    #[arg(long, env = "CAG_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Settings file; defaults to ./cag.toml when present.
    #[arg(long, env = "CAG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Answer every model call from this mock script instead of HTTP endpoints.
    #[arg(long, env = "CAG_MOCK")]
    pub mock: Option<PathBuf>,
    /// Upper bound on events processed at once.
    #[arg(long, env = "CAG_CONCURRENCY")]
    pub concurrency: Option<usize>,
    /// Directory of prompt template overrides.
    #[arg(long, env = "CAG_PROMPTS")]
    pub prompts: Option<PathBuf>,
    /// Restrict to these event ids (repeatable).
    #[arg(long = "event")]
    pub events: Vec<String>,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// concat0, concatr, cag0 or cagr.
    #[arg(long, env = "CAG_METHOD")]
    pub method: Option<String>,
    /// Re-prompting rounds per video.
    #[arg(long, env = "CAG_BUDGET")]
    pub budget: Option<u32>,
    /// Use each event's relevant videos.
    #[arg(long, conflicts_with = "rag")]
    pub oracle: bool,
    /// Use the top-k videos of a ranked run.
    #[arg(long)]
    pub rag: bool,
    /// Ranked run file for --rag.
    #[arg(long, env = "CAG_RUN")]
    pub run: Option<PathBuf>,
    #[arg(long, env = "CAG_TOP_K")]
    pub top_k: Option<usize>,
    /// Hand audio transcripts to the aggregator.
    #[arg(long)]
    pub transcripts: bool,
    /// Output directory for run artifacts.
    #[arg(long, env = "CAG_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory of run artifacts; defaults to --out.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    #[arg(long, env = "CAG_OUT")]
    pub out: Option<PathBuf>,
    /// Where report.json and report.txt go; defaults to the runs directory.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Only evaluate artifacts of this method.
    #[arg(long, env = "CAG_METHOD")]
    pub method: Option<String>,
    #[arg(long, value_enum, env = "CAG_GROUNDING")]
    pub grounding: Option<Grounding>,
    /// Human judgments: a file, or a directory laid out as {event}/{method}.json.
    #[arg(long, env = "CAG_JUDGMENTS")]
    pub judgments: Option<PathBuf>,
    /// Ranked run used for the nDCG column.
    #[arg(long, env = "CAG_RUN")]
    pub run: Option<PathBuf>,
    #[arg(long, env = "CAG_QRELS")]
    pub qrels: Option<PathBuf>,
    #[arg(long, env = "CAG_TOP_K")]
    pub top_k: Option<usize>,
    /// Question bank override (JSON, keyed by event type).
    #[arg(long, env = "CAG_QUESTIONS")]
    pub questions: Option<PathBuf>,
    /// External scorer base URL for BERTScore and AlignScore.
    #[arg(long, env = "CAG_SCORER_URL")]
    pub scorer_url: Option<String>,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long, env = "CAG_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long, env = "CAG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct NdcgArgs {
    #[arg(long, env = "CAG_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long, env = "CAG_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "CAG_RUN")]
    pub run: Option<PathBuf>,
    /// Relevance grades; defaults to the corpus relevant videos.
    #[arg(long, env = "CAG_QRELS")]
    pub qrels: Option<PathBuf>,
    #[arg(long, env = "CAG_TOP_K")]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Stats(a) => inspect::stats(a),
        Command::Ndcg(a) => inspect::ndcg(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<ConfigInvalid>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
