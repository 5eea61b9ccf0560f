//! ROUGE-N and ROUGE-L without stemming or stopword removal.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokens::TokenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a denominator was zero (an empty side); all values are 0.
    #[serde(default)]
    pub degenerate: bool,
}

impl RougeScore {
    fn from_counts(overlap: usize, pred_total: usize, ref_total: usize) -> Self {
        if pred_total == 0 || ref_total == 0 {
            return Self {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
                degenerate: true,
            };
        }
        let precision = overlap as f64 / pred_total as f64;
        let recall = overlap as f64 / ref_total as f64;
        Self {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            degenerate: false,
        }
    }
}

pub(crate) fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Clipped n-gram overlap between `pred` and `reference`.
pub fn rouge_n(pred: &str, reference: &str, n: usize) -> RougeScore {
    let pred = TokenSeq::new(pred);
    let reference = TokenSeq::new(reference);
    rouge_n_tokens(&pred, &reference, n)
}

pub fn rouge_n_tokens(pred: &TokenSeq, reference: &TokenSeq, n: usize) -> RougeScore {
    let mut ref_counts: HashMap<&[String], usize> = HashMap::new();
    for gram in reference.ngrams(n) {
        *ref_counts.entry(gram).or_default() += 1;
    }
    let mut pred_total = 0;
    let mut overlap = 0;
    for gram in pred.ngrams(n) {
        pred_total += 1;
        if let Some(left) = ref_counts.get_mut(gram) {
            if *left > 0 {
                *left -= 1;
                overlap += 1;
            }
        }
    }
    let ref_total = reference.ngrams(n).count();
    RougeScore::from_counts(overlap, pred_total, ref_total)
}

/// LCS-based ROUGE-L (sentence-level, whole text as one sequence).
pub fn rouge_l(pred: &str, reference: &str) -> RougeScore {
    let pred = TokenSeq::new(pred);
    let reference = TokenSeq::new(reference);
    let lcs = lcs_len(pred.tokens(), reference.tokens());
    RougeScore::from_counts(lcs, pred.len(), reference.len())
}

/// Length of the longest common subsequence, two-row DP.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
