//! Claim decomposition, grounding judgments and groundedness.
//!
//! An article is split into sentences and each sentence into atomic claims.
//! A claim is grounded when at least one input video supports it; G is the
//! grounded fraction of the article's claims.

mod decompose;
mod judge;

pub use decompose::{decompose, parse_claims, Claim, ClaimSet};
pub use judge::{
    groundedness, judge_with_llm, load_human_judgments, parse_verdict, video_evidence, ClaimVerdict, GroundingError,
    GroundingJudgment, HumanJudgment, JudgeKind,
};
