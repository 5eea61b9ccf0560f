//! Evaluation metrics: ROUGE, normalized edit distance, answer alignment,
//! Arg F1 and the external scorer client.
//!
//! Everything here except extraction and the scorer client is pure.

mod arg;
mod assign;
mod edit;
mod external;
mod questions;
mod rouge;
mod tokens;

pub use arg::{
    arg_f1, extract_answers, parse_answer_list, score_answer_lists, score_extractions, AnswerListScore, ArgError,
    ArgScore, ExtractionFailure, Prf, QuestionScore, QuestionStatus,
};
pub use assign::{align_answers, align_weights, min_cost_assignment, similarity_matrix, AlignedPair, AnswerAlignment};
pub use edit::{levenshtein, normalize_answer, normalized_edit_distance};
pub use external::{external_score, ExternalScore, Scorer, ScorerClient};
pub use questions::{QuestionBank, QuestionBankError};
pub use rouge::{lcs_len, rouge_l, rouge_n, rouge_n_tokens, RougeScore};
pub use tokens::TokenSeq;
