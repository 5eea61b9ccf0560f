//! Collaborative article generation over event videos.
//!
//! The crate is split along the lines of the pipeline:
//!
//! - [`corpus`]: events, videos, subclaims and annotation agreement.
//! - [`gateway`]: a single chat-completion contract for every model role,
//!   with an HTTP client and a scripted mock.
//! - [`engine`]: per-video summarization, reasoner relevance feedback with
//!   re-prompting, article synthesis and the concatenation baselines.
//! - [`retrieval`]: ranked run ingestion, top-k selection and nDCG.
//! - [`claims`]: claim decomposition, grounding judgments and groundedness.
//! - [`metrics`]: ROUGE, edit distance, answer alignment, Arg F1 and the
//!   external scorer client.

pub mod claims;
pub mod corpus;
pub mod engine;
pub mod gateway;
pub mod metrics;
pub mod parallel;
pub mod prompts;
pub mod retrieval;
pub mod text;

pub use corpus::{Corpus, EventTopic, EventType, Modality, Subclaim, VideoRecord};
pub use engine::{Article, Method, RunConfig, SummaryTrace};
pub use gateway::{ChatRequest, ChatResponse, Gateway, GatewayError, Role};
