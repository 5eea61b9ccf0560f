//! Maximum-weight bipartite alignment of predicted and reference answers.
//!
//! The similarity matrix is padded to a square with zero weights and
//! solved as a minimum-cost assignment (`cost = 1 - similarity`) with the
//! O(n^3) shortest-augmenting-path form of the Hungarian method.

use serde::{Deserialize, Serialize};

use super::edit::normalized_edit_distance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub pred: usize,
    pub reference: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnswerAlignment {
    /// Matched pairs with positive similarity, ordered by `pred`.
    pub pairs: Vec<AlignedPair>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_ref: Vec<usize>,
}

impl AnswerAlignment {
    pub fn total_similarity(&self) -> f64 {
        self.pairs.iter().map(|p| p.similarity).sum()
    }
}

/// `1 - normalized_edit_distance` for every (pred, ref) pair.
pub fn similarity_matrix(pred: &[String], reference: &[String]) -> Vec<Vec<f64>> {
    pred.iter()
        .map(|p| reference.iter().map(|r| 1.0 - normalized_edit_distance(p, r)).collect())
        .collect()
}

pub fn align_answers(pred: &[String], reference: &[String]) -> AnswerAlignment {
    let sim = similarity_matrix(pred, reference);
    align_weights(&sim, pred.len(), reference.len())
}

/// Aligns a `rows x cols` weight matrix (weights in `[0, 1]`).
pub fn align_weights(weights: &[Vec<f64>], rows: usize, cols: usize) -> AnswerAlignment {
    let n = rows.max(cols);
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let w = if i < rows && j < cols { weights[i][j] } else { 0.0 };
                    1.0 - w
                })
                .collect()
        })
        .collect();
    let assignment = min_cost_assignment(&cost);

    let mut pairs = Vec::new();
    let mut ref_used = vec![false; cols];
    let mut unmatched_pred = Vec::new();
    for (i, &j) in assignment.iter().enumerate().take(rows) {
        if j < cols && weights[i][j] > 0.0 {
            pairs.push(AlignedPair {
                pred: i,
                reference: j,
                similarity: weights[i][j],
            });
            ref_used[j] = true;
        } else {
            unmatched_pred.push(i);
        }
    }
    let unmatched_ref = (0..cols).filter(|&j| !ref_used[j]).collect();
    AnswerAlignment {
        pairs,
        unmatched_pred,
        unmatched_ref,
    }
}

/// Minimum-cost perfect assignment on a square matrix. Returns the column
/// assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    // 1-based potentials; column 0 is the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}
