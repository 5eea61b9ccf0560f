use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClaimSet;
use crate::engine::{final_answer_block, SummaryTrace};
use crate::gateway::{ChatRequest, GatewayError, Message, Role};
use crate::prompts::PromptSet;
use crate::text::render_template;
use crate::{Gateway, VideoRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JudgeKind {
    HumanFile,
    LlmJudge,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    /// Video id to supported.
    pub per_video: BTreeMap<String, bool>,
    /// A verdict that covers every input video at once.
    pub all_videos: Option<bool>,
    /// At least one verdict fell back to unsupported after an unusable reply.
    pub flagged: bool,
}

impl ClaimVerdict {
    pub fn is_judged(&self) -> bool {
        self.all_videos.is_some() || !self.per_video.is_empty()
    }

    /// Supported by some video.
    pub fn supported(&self) -> bool {
        self.all_videos == Some(true) || self.per_video.values().any(|&s| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingJudgment {
    pub judge_kind: JudgeKind,
    /// One entry per claim, in claim order.
    pub claims: Vec<ClaimVerdict>,
}

impl GroundingJudgment {
    pub fn flagged(&self) -> usize {
        self.claims.iter().filter(|c| c.flagged).count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GroundingError {
    #[error("groundedness is undefined for an empty claim set")]
    EmptyClaimSet,
    #[error("claim {claim_index} has no judgment")]
    IncompleteJudgments { claim_index: usize },
    #[error("judgment covers {judged} claims but the claim set has {claims}")]
    ClaimCountMismatch { judged: usize, claims: usize },
    #[error("judgment for claim {claim_index} names video {video_id}, which is not an input video")]
    UnknownVideo { claim_index: usize, video_id: String },
    #[error("judgment for claim {claim_index}: no such claim")]
    UnknownClaim { claim_index: usize },
    #[error("cannot read judgments {path}: {detail}")]
    Unreadable { path: String, detail: String },
    #[error("grounding judge failed: {0}")]
    Gateway(#[from] GatewayError),
}

/// One row of a human judgments file. `video_id: null` is a verdict for
/// all input videos at once. `claim_index` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanJudgment {
    pub claim_index: usize,
    #[serde(default)]
    pub video_id: Option<String>,
    #[serde(deserialize_with = "binary")]
    pub supported: bool,
}

fn binary<'de, D: serde::Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    match Flag::deserialize(d)? {
        Flag::Bool(b) => Ok(b),
        Flag::Int(0) => Ok(false),
        Flag::Int(1) => Ok(true),
        Flag::Int(n) => Err(serde::de::Error::custom(format!("supported must be 0 or 1, got {n}"))),
    }
}

/// Loads and checks a human judgments file against `claims` and the input
/// video ids. Every claim needs at least one row.
pub fn load_human_judgments(
    path: &Path,
    claims: &ClaimSet,
    video_ids: &BTreeSet<String>,
) -> Result<GroundingJudgment, GroundingError> {
    let unreadable = |detail: String| GroundingError::Unreadable {
        path: path.display().to_string(),
        detail,
    };
    let raw = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
    let rows: Vec<HumanJudgment> = serde_json::from_str(&raw).map_err(|e| unreadable(e.to_string()))?;
    human_judgment(&rows, claims, video_ids)
}

pub(crate) fn human_judgment(
    rows: &[HumanJudgment],
    claims: &ClaimSet,
    video_ids: &BTreeSet<String>,
) -> Result<GroundingJudgment, GroundingError> {
    let mut verdicts = vec![ClaimVerdict::default(); claims.len()];
    for row in rows {
        let verdict = verdicts.get_mut(row.claim_index).ok_or(GroundingError::UnknownClaim {
            claim_index: row.claim_index,
        })?;
        match &row.video_id {
            None => verdict.all_videos = Some(row.supported),
            Some(v) if video_ids.contains(v) => {
                verdict.per_video.insert(v.clone(), row.supported);
            }
            Some(v) => {
                return Err(GroundingError::UnknownVideo {
                    claim_index: row.claim_index,
                    video_id: v.clone(),
                })
            }
        }
    }
    if let Some(claim_index) = verdicts.iter().position(|v| !v.is_judged()) {
        return Err(GroundingError::IncompleteJudgments { claim_index });
    }
    Ok(GroundingJudgment {
        judge_kind: JudgeKind::HumanFile,
        claims: verdicts,
    })
}

/// Text the judge sees for one video: every summary in its trace, then the
/// transcript when present.
pub fn video_evidence(video: &VideoRecord, trace: Option<&SummaryTrace>) -> String {
    let mut parts: Vec<String> = trace
        .map(|t| t.summaries().map(|s| s.trim().to_string()).collect())
        .unwrap_or_default();
    if let Some(transcript) = &video.transcript {
        parts.push(format!("Audio transcript:\n{}", transcript.trim()));
    }
    parts.retain(|p| !p.is_empty());
    parts.join("\n\n")
}

/// Reads a strict YES/NO as the final word of the reply's answer block.
pub fn parse_verdict(reply: &str) -> Option<bool> {
    let last = final_answer_block(reply)
        .split_whitespace()
        .last()?
        .trim_matches(|c: char| !c.is_alphanumeric());
    match last {
        "YES" | "Yes" | "yes" => Some(true),
        "NO" | "No" | "no" => Some(false),
        _ => None,
    }
}

const VERDICT_ATTEMPTS: usize = 2;

/// Asks the JUDGE role about every (claim, video) pair. `evidence` maps video
/// id to the text shown for it. A reply without a final YES/NO is retried
/// once, then counted unsupported and flagged.
pub fn judge_with_llm(
    claims: &ClaimSet,
    evidence: &BTreeMap<String, String>,
    gw: &dyn Gateway,
    prompts: &PromptSet,
) -> Result<GroundingJudgment, GroundingError> {
    let mut verdicts = Vec::with_capacity(claims.len());
    for (index, claim) in claims.claims.iter().enumerate() {
        let mut verdict = ClaimVerdict::default();
        for (video_id, text) in evidence {
            let prompt = render_template(&prompts.judge, &[("evidence", text), ("claim", &claim.text)]);
            let request = ChatRequest::new(Role::Judge, vec![Message::user(prompt)]);
            let mut supported = None;
            for attempt in 1..=VERDICT_ATTEMPTS {
                let reply = gw.complete(&request)?.text;
                supported = parse_verdict(&reply);
                if supported.is_some() {
                    break;
                }
                log::warn!("judge reply {attempt}/{VERDICT_ATTEMPTS} for claim {index}, video {video_id} has no YES/NO: {reply:?}");
            }
            verdict.flagged |= supported.is_none();
            verdict.per_video.insert(video_id.clone(), supported.unwrap_or(false));
        }
        verdicts.push(verdict);
    }
    Ok(GroundingJudgment {
        judge_kind: JudgeKind::LlmJudge,
        claims: verdicts,
    })
}

/// Fraction of claims supported by at least one video.
pub fn groundedness(judgment: &GroundingJudgment, claims: &ClaimSet) -> Result<f64, GroundingError> {
    if claims.is_empty() {
        return Err(GroundingError::EmptyClaimSet);
    }
    if judgment.claims.len() != claims.len() {
        return Err(GroundingError::ClaimCountMismatch {
            judged: judgment.claims.len(),
            claims: claims.len(),
        });
    }
    if let Some(claim_index) = judgment.claims.iter().position(|v| !v.is_judged()) {
        return Err(GroundingError::IncompleteJudgments { claim_index });
    }
    let supported = judgment.claims.iter().filter(|v| v.supported()).count();
    Ok(supported as f64 / claims.len() as f64)
}
