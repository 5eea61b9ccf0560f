//! Ranked runs from external retrievers, top-k selection and nDCG@k.
//!
//! Run files use the six-column line `event_id Q0 video_id rank score run_tag`.
//! Within an event, entries are ordered by descending score; equal scores
//! keep file order.

mod ndcg;
mod qrels;
mod run;

pub use ndcg::{dcg, ndcg_at_k, NdcgReport};
pub use qrels::{Qrels, QrelsError};
pub use run::{load_run, parse_run, RankedRun, RunEntry, RunError};

/// Number of ranked videos handed to generation in the RAG setting.
pub const DEFAULT_TOP_K: usize = 5;
