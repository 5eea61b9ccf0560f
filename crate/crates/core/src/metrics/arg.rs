//! Arg F1: answer-span F1 over role-focused questions.
//!
//! Answers are extracted from both articles per question, aligned by
//! maximum-weight matching on edit similarity, and scored with soft
//! precision/recall. Exact-match scores reuse the same alignment.

use serde::{Deserialize, Serialize};

use super::assign::align_answers;
use super::edit::normalize_answer;
use super::questions::QuestionBank;
use super::rouge::harmonic_mean;
use crate::corpus::EventType;
use crate::gateway::{ChatRequest, Gateway, GatewayError, Message, Role};
use crate::prompts::PromptSet;
use crate::text::render_template;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_sum(sum: f64, n_pred: usize, n_ref: usize) -> Self {
        let precision = if n_pred == 0 { 0.0 } else { sum / n_pred as f64 };
        let recall = if n_ref == 0 { 0.0 } else { sum / n_ref as f64 };
        Self {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerListScore {
    pub edit: Prf,
    pub exact: Prf,
}

/// Scores one question's answer lists. `None` when the reference side is
/// empty: such questions do not enter the average.
pub fn score_answer_lists(pred: &[String], reference: &[String]) -> Option<AnswerListScore> {
    if reference.is_empty() {
        return None;
    }
    let alignment = align_answers(pred, reference);
    let mut edit_sum = 0.0;
    let mut exact_sum = 0.0;
    for pair in &alignment.pairs {
        edit_sum += pair.similarity;
        if normalize_answer(&pred[pair.pred]) == normalize_answer(&reference[pair.reference]) {
            exact_sum += 1.0;
        }
    }
    Some(AnswerListScore {
        edit: Prf::from_sum(edit_sum, pred.len(), reference.len()),
        exact: Prf::from_sum(exact_sum, pred.len(), reference.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Scored,
    /// Reference side had no answers.
    SkippedNoReference,
    /// Extractor reply was not a JSON list of strings (after one retry).
    ExtractionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub question: String,
    pub status: QuestionStatus,
    #[serde(default)]
    pub pred_answers: Vec<String>,
    #[serde(default)]
    pub ref_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<AnswerListScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgScore {
    /// Macro average over scored questions; `None` when nothing was scored.
    pub edit_f1: Option<f64>,
    pub exact_f1: Option<f64>,
    pub questions: Vec<QuestionScore>,
}

impl ArgScore {
    pub fn scored(&self) -> usize {
        self.count(QuestionStatus::Scored)
    }

    pub fn flagged(&self) -> usize {
        self.count(QuestionStatus::ExtractionFailed)
    }

    fn count(&self, status: QuestionStatus) -> usize {
        self.questions.iter().filter(|q| q.status == status).count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ArgError {
    #[error("no questions for event type {0}")]
    UnknownEventType(EventType),
    #[error("answer extraction failed: {0}")]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionFailure {
    pub reply: String,
}

/// Parses an extractor reply: a JSON array of strings, possibly wrapped in
/// prose or a code fence. Numbers are accepted and stringified.
pub fn parse_answer_list(reply: &str) -> Option<Vec<String>> {
    let start = reply.find('[')?;
    let end = reply.rfind(']')?;
    if end < start {
        return None;
    }
    let items: Vec<serde_json::Value> = serde_json::from_str(&reply[start..=end]).ok()?;
    items
        .into_iter()
        .map(|v| match v {
            serde_json::Value::String(s) => Some(s.trim().to_string()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            _ => None,
        })
        .filter(|s| s.as_ref().is_none_or(|s| !s.is_empty()))
        .collect()
}

/// Asks the extractor for the answers to each question in `article`.
pub fn extract_answers(
    article: &str,
    questions: &[String],
    gw: &dyn Gateway,
    prompts: &PromptSet,
) -> Result<Vec<Result<Vec<String>, ExtractionFailure>>, GatewayError> {
    let mut out = Vec::with_capacity(questions.len());
    for question in questions {
        let prompt = render_template(&prompts.extract, &[("article", article), ("question", question)]);
        let request = ChatRequest::new(Role::Extractor, vec![Message::user(prompt)]);
        let mut parsed = None;
        let mut last = String::new();
        for _ in 0..2 {
            last = gw.complete(&request)?.text;
            parsed = parse_answer_list(&last);
            if parsed.is_some() {
                break;
            }
        }
        out.push(parsed.ok_or_else(|| {
            log::warn!("unparseable extraction for question {question:?}: {last:?}");
            ExtractionFailure { reply: last }
        }));
    }
    Ok(out)
}

/// Scores pre-extracted answer lists question by question.
pub fn score_extractions(
    questions: &[String],
    pred: &[Result<Vec<String>, ExtractionFailure>],
    reference: &[Result<Vec<String>, ExtractionFailure>],
) -> ArgScore {
    let mut scored = Vec::new();
    let per_question = questions
        .iter()
        .zip(pred.iter().zip(reference))
        .map(|(question, (p, r))| {
            let (p, r) = match (p, r) {
                (Ok(p), Ok(r)) => (p, r),
                _ => {
                    return QuestionScore {
                        question: question.clone(),
                        status: QuestionStatus::ExtractionFailed,
                        pred_answers: p.clone().unwrap_or_default(),
                        ref_answers: r.clone().unwrap_or_default(),
                        score: None,
                    }
                }
            };
            let score = score_answer_lists(p, r);
            if let Some(s) = score {
                scored.push(s);
            }
            QuestionScore {
                question: question.clone(),
                status: if score.is_some() {
                    QuestionStatus::Scored
                } else {
                    QuestionStatus::SkippedNoReference
                },
                pred_answers: p.clone(),
                ref_answers: r.clone(),
                score,
            }
        })
        .collect();
    let mean = |f: fn(&AnswerListScore) -> f64| {
        (!scored.is_empty()).then(|| scored.iter().map(f).sum::<f64>() / scored.len() as f64)
    };
    ArgScore {
        edit_f1: mean(|s| s.edit.f1),
        exact_f1: mean(|s| s.exact.f1),
        questions: per_question,
    }
}

/// Full Arg F1 for one predicted article against its reference.
pub fn arg_f1(
    pred_article: &str,
    ref_article: &str,
    event_type: EventType,
    bank: &QuestionBank,
    gw: &dyn Gateway,
    prompts: &PromptSet,
) -> Result<ArgScore, ArgError> {
    let questions = bank
        .questions(event_type)
        .ok_or(ArgError::UnknownEventType(event_type))?;
    let pred = extract_answers(pred_article, questions, gw, prompts)?;
    let reference = extract_answers(ref_article, questions, gw, prompts)?;
    Ok(score_extractions(questions, &pred, &reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn paris_france_against_paris() {
        let score = score_answer_lists(&s(&["paris", "france"]), &s(&["paris"])).unwrap();
        assert_eq!(score.edit.precision, 0.5);
        assert_eq!(score.edit.recall, 1.0);
        assert!((score.edit.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(score.exact, score.edit);
    }

    #[test]
    fn partial_matches_earn_soft_credit_only_under_edit() {
        let score = score_answer_lists(&s(&["kitten"]), &s(&["sitting"])).unwrap();
        assert!((score.edit.f1 - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(score.exact.f1, 0.0);
    }

    #[test]
    fn empty_reference_is_skipped() {
        assert!(score_answer_lists(&s(&["x"]), &[]).is_none());
        let arg = score_extractions(
            &s(&["q1", "q2"]),
            &[Ok(vec![]), Ok(s(&["a"]))],
            &[Ok(vec![]), Ok(vec![])],
        );
        assert_eq!(arg.edit_f1, None);
        assert_eq!(arg.scored(), 0);
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let score = score_answer_lists(&[], &s(&["paris"])).unwrap();
        assert_eq!(score.edit.f1, 0.0);
    }

    #[test]
    fn reply_parsing() {
        assert_eq!(
            parse_answer_list(r#"["Paris", "France"]"#),
            Some(s(&["Paris", "France"]))
        );
        assert_eq!(parse_answer_list("```json\n[]\n```"), Some(vec![]));
        assert_eq!(parse_answer_list("[2019, \"April\"]"), Some(s(&["2019", "April"])));
        assert_eq!(parse_answer_list("sorry"), None);
        assert_eq!(parse_answer_list(r#"[{"a": 1}]"#), None);
    }
}
