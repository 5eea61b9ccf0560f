use std::path::PathBuf;

use cag_core::engine::{write_run_artifact, Engine};
use cag_core::parallel::bounded_map;
use cag_core::retrieval::{RankedRun, DEFAULT_TOP_K};
use cag_core::{Corpus, EventTopic, Method, Role, RunConfig, VideoRecord};
use serde::Serialize;

use crate::backend::Backend;
use crate::config::{self, invalid, FileConfig, VideoSource};
use crate::GenerateArgs;

const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Serialize)]
struct EventOutcome {
    event_id: String,
    method: Method,
    video_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifact: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

enum Videos {
    Oracle,
    Rag(RankedRun),
}

impl Videos {
    fn resolve<'c>(&self, corpus: &'c Corpus, event: &EventTopic, k: usize) -> Result<Vec<&'c VideoRecord>, String> {
        match self {
            Videos::Oracle => Ok(corpus.oracle_videos(event)),
            Videos::Rag(run) => run
                .top_k(&event.id, k)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|id| {
                    corpus
                        .video(id)
                        .ok_or_else(|| format!("ranked video {id} is not in the corpus"))
                })
                .collect(),
        }
    }

    fn label(&self) -> String {
        match self {
            Videos::Oracle => "oracle".into(),
            Videos::Rag(run) => format!("rag:{}", run.run_tag),
        }
    }
}

/// Returns whether every selected event produced an artifact.
pub fn run(args: GenerateArgs) -> anyhow::Result<bool> {
    let file = FileConfig::discover(args.common.config.as_deref())?;
    let method = config::parse_method(args.method.as_deref().or(file.method.as_deref()).unwrap_or("cagr"))?;
    let mut run_config = RunConfig::new(method, args.budget.or(file.budget).unwrap_or(method.default_budget()));
    run_config.include_transcripts = args.transcripts || file.transcripts.unwrap_or(false);
    run_config.top_k = args.top_k.or(file.top_k).unwrap_or(DEFAULT_TOP_K);
    run_config.validate().map_err(|e| invalid(e.to_string()))?;

    let source = if args.rag {
        VideoSource::Rag
    } else if args.oracle {
        VideoSource::Oracle
    } else {
        file.videos.unwrap_or(VideoSource::Oracle)
    };
    let videos = match source {
        VideoSource::Oracle => Videos::Oracle,
        VideoSource::Rag => Videos::Rag(config::load_run(args.run.as_deref().or(file.run.as_deref()))?),
    };

    let corpus = config::load_corpus(args.common.corpus.as_deref().or(file.corpus.as_deref()))?;
    let events = config::select_events(&corpus, &args.common.events)?;
    let prompts = config::load_prompts(args.common.prompts.as_deref().or(file.prompts.as_deref()))?;
    let out = args.out.or(file.out.clone()).unwrap_or_else(|| PathBuf::from("runs"));

    let backend = Backend::build(args.common.mock.as_deref().or(file.mock.as_deref()), &file)?;
    let mut roles = vec![Role::VideoSummarizer];
    if run_config.budget_r > 0 {
        roles.push(Role::Reasoner);
    }
    if method.uses_aggregator() {
        roles.push(Role::Aggregator);
    }
    backend.require(&roles)?;
    let gw = backend.gateway();

    let cap = args
        .common
        .concurrency
        .or(file.concurrency)
        .unwrap_or(DEFAULT_CONCURRENCY)
        .min(gw.max_concurrency());
    let outcomes = bounded_map(&events, cap, |_, event| {
        let mut outcome = EventOutcome {
            event_id: event.id.clone(),
            method,
            video_ids: Vec::new(),
            artifact: None,
            error: None,
        };
        let result = videos.resolve(&corpus, event, run_config.top_k).and_then(|vs| {
            outcome.video_ids = vs.iter().map(|v| v.id.clone()).collect();
            let engine = Engine::new(gw).with_prompts(prompts.clone());
            let mut output = engine.run_method(&run_config, event, &vs).map_err(|e| e.to_string())?;
            output.article.provenance.video_source = Some(videos.label());
            write_run_artifact(&out, &output).map_err(|e| format!("cannot write artifact: {e}"))
        });
        match result {
            Ok(path) => {
                log::info!("{}: wrote {}", event.id, path.display());
                outcome.artifact = Some(path);
            }
            Err(e) => {
                eprintln!("{} ({method}): {e}", event.id);
                outcome.error = Some(e);
            }
        }
        outcome
    });

    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    std::fs::create_dir_all(&out)?;
    let summary = serde_json::to_string_pretty(&outcomes)?;
    std::fs::write(out.join(format!("generate.{method}.json")), summary + "\n")?;
    eprintln!(
        "{method}: {} of {} events written to {}",
        outcomes.len() - failed,
        outcomes.len(),
        out.display()
    );
    Ok(failed == 0)
}
