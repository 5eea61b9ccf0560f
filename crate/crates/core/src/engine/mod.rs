//! Collaborative article generation.
//!
//! Each video gets a generic summary from the video summarizer. The
//! reasoner then either accepts the latest summary or issues a new,
//! event-targeted prompt, up to an iteration budget. The aggregator writes
//! the lead section from all summaries. The concatenation baselines skip
//! the aggregator.

mod artifact;
mod cite;
mod feedback;
mod run;
mod summarize;
mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gateway::{Decoding, Gateway, GatewayError, Role};
use crate::prompts::PromptSet;

pub use artifact::{read_run_artifact, run_artifact_path, write_run_artifact, RunArtifact};
pub use cite::{cite_sentences, SentenceCitation};
pub use feedback::{final_answer_block, parse_feedback, Feedback, Unparseable};
pub use run::RunOutput;
pub use synth::{aggregator_input, extract_lead};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "concat0")]
    Concat0,
    #[serde(rename = "concatr")]
    ConcatRePrompt,
    #[serde(rename = "cag0")]
    Cag0,
    #[serde(rename = "cagr")]
    CagR,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Concat0, Method::ConcatRePrompt, Method::Cag0, Method::CagR];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Concat0 => "concat0",
            Method::ConcatRePrompt => "concatr",
            Method::Cag0 => "cag0",
            Method::CagR => "cagr",
        }
    }

    /// Budget used when none is given.
    pub fn default_budget(self) -> u32 {
        match self {
            Method::Concat0 | Method::Cag0 => 0,
            Method::ConcatRePrompt | Method::CagR => 2,
        }
    }

    pub fn uses_aggregator(self) -> bool {
        matches!(self, Method::Cag0 | Method::CagR)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected concat0, concatr, cag0 or cagr)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub budget_r: u32,
    pub include_transcripts: bool,
    /// Videos taken from a ranked run in the retrieval setting.
    pub top_k: usize,
}

impl RunConfig {
    pub fn new(method: Method, budget_r: u32) -> Self {
        Self {
            method,
            budget_r,
            include_transcripts: false,
            top_k: 5,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        match self.method {
            Method::Concat0 | Method::Cag0 if self.budget_r != 0 => {
                bad(format!("{} requires budget 0, got {}", self.method, self.budget_r))
            }
            Method::CagR if self.budget_r == 0 => bad("cagr requires a budget of at least 1".into()),
            _ if self.top_k == 0 => bad("top_k must be positive".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Sufficient,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepromptRound {
    pub reprompt: String,
    pub summary: String,
}

/// Everything the summarizer said about one video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTrace {
    pub video_id: String,
    pub generic_summary: String,
    pub rounds: Vec<RepromptRound>,
    pub terminated_by: Termination,
    pub reasoner_calls: usize,
    /// Fallbacks taken while parsing reasoner replies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub audit: Vec<String>,
}

impl SummaryTrace {
    /// Generic summary followed by every re-prompted summary.
    pub fn summaries(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.generic_summary.as_str()).chain(self.rounds.iter().map(|r| r.summary.as_str()))
    }
}

/// Where an engine stage failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    GenericSummary,
    Feedback,
    Reprompt,
    Aggregation,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("no input videos")]
    NoVideos,
    #[error("{stage:?} failed{}{}: {source}",
        video_id.as_ref().map(|v| format!(" for video {v}")).unwrap_or_default(),
        round.map(|r| format!(" in round {r}")).unwrap_or_default())]
    Gateway {
        stage: Stage,
        video_id: Option<String>,
        round: Option<usize>,
        #[source]
        source: GatewayError,
    },
    #[error("reasoner reply is neither the sentinel nor a prefixed query: {reply:?}")]
    UnparseableFeedback { reply: String },
    #[error("summary is empty; relevance feedback needs text")]
    EmptySummary,
    #[error("aggregator output lacked the <lead> marker after {attempts} attempts")]
    MissingLeadMarker { attempts: usize },
    #[error("empty output: {0}")]
    EmptyOutput(String),
    #[error("transcript given for video {0} which has no trace")]
    TranscriptWithoutTrace(String),
    #[error("citation names video {0} outside the input set")]
    CitationOutsideInput(String),
}

pub trait Clock: Send + Sync {
    fn now(&self) -> String;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> String {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
    }
}

/// Always reports the same instant; used to make artifacts byte-stable.
pub struct FixedClock(pub String);

impl Clock for FixedClock {
    fn now(&self) -> String {
        self.0.clone()
    }
}

/// Record of how an article was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub video_ids: Vec<String>,
    /// `oracle`, or `rag:<run tag>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_source: Option<String>,
    pub models: BTreeMap<Role, String>,
    pub prompt_hashes: BTreeMap<String, String>,
    pub decoding: Decoding,
    /// Decoding values are artifact defaults, not reported settings.
    pub decoding_is_default: bool,
    /// Citations are attributed after generation by lexical overlap.
    pub citation_method: String,
    pub ungrounded_sentences: Vec<usize>,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub event_id: String,
    pub body: String,
    pub citations: Vec<SentenceCitation>,
    pub provenance: Provenance,
}

pub const CITATION_METHOD: &str = "post-hoc: video whose trace text has the highest ROUGE-1 recall of the sentence";

/// Drives the generation pipeline against one gateway.
pub struct Engine<'g> {
    gw: &'g dyn Gateway,
    prompts: PromptSet,
    clock: Box<dyn Clock>,
    decoding: Decoding,
    fps: Option<f64>,
}

impl<'g> Engine<'g> {
    pub fn new(gw: &'g dyn Gateway) -> Self {
        Self {
            gw,
            prompts: PromptSet::default(),
            clock: Box::new(SystemClock),
            decoding: Decoding::default(),
            fps: Some(1.0),
        }
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn with_decoding(mut self, decoding: Decoding) -> Self {
        self.decoding = decoding;
        self
    }

    /// Frame-rate hint sent with every video; `None` leaves it to the server.
    pub fn with_fps(mut self, fps: Option<f64>) -> Self {
        self.fps = fps;
        self
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub fn gateway(&self) -> &dyn Gateway {
        self.gw
    }

    fn provenance(&self, config: RunConfig, video_ids: Vec<String>, started_at: String) -> Provenance {
        let roles: &[Role] = if config.method.uses_aggregator() {
            &[Role::VideoSummarizer, Role::Reasoner, Role::Aggregator]
        } else {
            &[Role::VideoSummarizer, Role::Reasoner]
        };
        Provenance {
            config,
            video_ids,
            video_source: None,
            models: roles.iter().map(|&r| (r, self.gw.model_id(r))).collect(),
            prompt_hashes: self.prompts.hashes(),
            decoding: self.decoding,
            decoding_is_default: self.decoding == Decoding::default(),
            citation_method: CITATION_METHOD.to_string(),
            ungrounded_sentences: Vec::new(),
            started_at,
            finished_at: self.clock.now(),
        }
    }
}
