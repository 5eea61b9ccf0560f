//! `cag.toml` settings and their merge with flags and environment.
//!
//! Clap already resolves flag > environment; values still unset after that
//! fall back to the file, then to built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cag_core::gateway::{EndpointConfig, RetryPolicy};
use cag_core::prompts::PromptSet;
use cag_core::retrieval::{Qrels, RankedRun};
use cag_core::{Corpus, EventTopic, Method, Role};
use serde::Deserialize;

/// A configuration problem; the process exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigInvalid(pub String);

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigInvalid(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VideoSource {
    Oracle,
    Rag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Grounding {
    #[default]
    Off,
    Human,
    Llm,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointFile {
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_ms: Option<u64>,
    pub concurrency: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryFile {
    pub max_retries: Option<u32>,
    pub base_delay_ms: Option<u64>,
}

/// Contents of a `cag.toml`. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub method: Option<String>,
    pub budget: Option<u32>,
    pub videos: Option<VideoSource>,
    pub run: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub transcripts: Option<bool>,
    pub out: Option<PathBuf>,
    pub concurrency: Option<usize>,
    pub grounding: Option<Grounding>,
    pub judgments: Option<PathBuf>,
    pub mock: Option<PathBuf>,
    pub prompts: Option<PathBuf>,
    pub questions: Option<PathBuf>,
    pub scorer_url: Option<String>,
    #[serde(default)]
    pub retry: RetryFile,
    /// Keyed by role in snake case, e.g. `[gateway.video_summarizer]`.
    #[serde(default)]
    pub gateway: BTreeMap<String, EndpointFile>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&raw).map_err(|e| invalid(format!("bad config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.corpus,
            &mut cfg.run,
            &mut cfg.qrels,
            &mut cfg.out,
            &mut cfg.judgments,
            &mut cfg.mock,
            &mut cfg.prompts,
            &mut cfg.questions,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Loads `path` when given, else `./cag.toml` when it exists.
    pub fn discover(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None if Path::new("cag.toml").is_file() => Self::load(Path::new("cag.toml")),
            None => Ok(Self::default()),
        }
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        let mut policy = RetryPolicy::default();
        if let Some(n) = self.retry.max_retries {
            policy.max_retries = n;
        }
        if let Some(ms) = self.retry.base_delay_ms {
            policy.base_delay_ms = ms;
        }
        policy
    }

    /// Endpoints from the file, overridden role by role by `CAG_GATEWAY_*`.
    pub fn endpoints(&self) -> anyhow::Result<BTreeMap<Role, EndpointConfig>> {
        let mut out = BTreeMap::new();
        for (key, ep) in &self.gateway {
            let role = Role::ALL
                .into_iter()
                .find(|r| r.tag().eq_ignore_ascii_case(key))
                .ok_or_else(|| invalid(format!("unknown gateway role `{key}`")))?;
            let mut cfg = EndpointConfig::new(&ep.url, &ep.model);
            cfg.api_key = ep.api_key_env.as_ref().and_then(|v| std::env::var(v).ok());
            if let Some(t) = ep.timeout_ms {
                cfg.timeout_ms = t;
            }
            if let Some(c) = ep.concurrency {
                cfg.concurrency = c.max(1);
            }
            out.insert(role, cfg);
        }
        for role in Role::ALL {
            if let Some(cfg) = EndpointConfig::from_env(role) {
                out.insert(role, cfg);
            }
        }
        Ok(out)
    }
}

pub fn load_corpus(path: Option<&Path>) -> anyhow::Result<Corpus> {
    let path = path.ok_or_else(|| invalid("no corpus given; pass --corpus or set `corpus` in cag.toml"))?;
    cag_core::corpus::load_corpus(path).map_err(|e| invalid(format!("corpus {}: {e}", path.display())))
}

pub fn load_prompts(dir: Option<&Path>) -> anyhow::Result<PromptSet> {
    match dir {
        Some(d) => PromptSet::load_dir(d).map_err(|e| invalid(format!("prompts {}: {e}", d.display()))),
        None => Ok(PromptSet::default()),
    }
}

pub fn parse_method(raw: &str) -> anyhow::Result<Method> {
    raw.parse().map_err(invalid)
}

/// Events named by `--event`, in corpus order; all events when none are named.
pub fn select_events<'c>(corpus: &'c Corpus, wanted: &[String]) -> anyhow::Result<Vec<&'c EventTopic>> {
    if let Some(unknown) = wanted.iter().find(|id| corpus.event(id).is_none()) {
        return Err(invalid(format!("unknown event `{unknown}`")));
    }
    Ok(corpus
        .events()
        .iter()
        .filter(|e| wanted.is_empty() || wanted.contains(&e.id))
        .collect())
}

pub fn load_run(path: Option<&Path>) -> anyhow::Result<RankedRun> {
    let path = path.ok_or_else(|| invalid("no ranked run given; pass --run"))?;
    if !path.is_file() {
        return Err(invalid(format!("run file {} does not exist", path.display())));
    }
    cag_core::retrieval::load_run(path).map_err(|e| invalid(format!("run file {}: {e}", path.display())))
}

pub fn load_qrels(path: Option<&Path>, corpus: Option<&Corpus>) -> anyhow::Result<Qrels> {
    match (path, corpus) {
        (Some(p), _) => Qrels::load(p).map_err(|e| invalid(e.to_string())),
        (None, Some(c)) => Ok(Qrels::from_corpus(c)),
        (None, None) => Err(invalid("relevance grades need --qrels or --corpus")),
    }
}
