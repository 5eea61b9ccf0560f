//! Annotation matrices and Krippendorff's alpha for nominal data.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// One binary judgment column in the grounding annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Channel {
    Audio,
    Video,
    Ocr,
    None,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Audio, Channel::Video, Channel::Ocr, Channel::None];
}

/// What an alpha is computed over: a single channel, or every
/// (item, channel) cell pooled as its own unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AlphaScope {
    Channel(Channel),
    Overall,
}

impl fmt::Display for AlphaScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaScope::Channel(c) => write!(f, "{c:?}"),
            AlphaScope::Overall => f.write_str("Overall"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub claim_id: String,
    pub video_id: String,
}

/// Per-annotator, per-item channel judgments. `None` means the annotator
/// did not cover the item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationMatrix {
    pub annotators: Vec<String>,
    pub items: Vec<AnnotationItem>,
    pub judgments: Vec<Vec<Option<BTreeMap<Channel, u8>>>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgreementError {
    #[error("malformed annotation matrix: {0}")]
    Malformed(String),
    #[error("need at least two annotators and one unit with two judgments")]
    InsufficientJudgments,
    #[error("expected disagreement is zero (only one value observed); alpha is undefined")]
    DegenerateData,
}

impl AnnotationMatrix {
    /// Checks shape and that every covered item has exactly one binary value
    /// per channel.
    pub fn validate(&self) -> Result<(), AgreementError> {
        let bad = |m: String| Err(AgreementError::Malformed(m));
        if self.judgments.len() != self.annotators.len() {
            return bad(format!(
                "{} annotators but {} judgment rows",
                self.annotators.len(),
                self.judgments.len()
            ));
        }
        for (a, row) in self.judgments.iter().enumerate() {
            if row.len() != self.items.len() {
                return bad(format!(
                    "annotator {} judged {} items, expected {}",
                    self.annotators[a],
                    row.len(),
                    self.items.len()
                ));
            }
            for (i, cell) in row.iter().enumerate() {
                let Some(cell) = cell else { continue };
                for ch in Channel::ALL {
                    match cell.get(&ch) {
                        Some(0 | 1) => {}
                        Some(v) => return bad(format!("judgments[{a}][{i}].{ch:?} = {v} is not binary")),
                        None => return bad(format!("judgments[{a}][{i}] lacks channel {ch:?}")),
                    }
                }
                if cell.len() != Channel::ALL.len() {
                    return bad(format!("judgments[{a}][{i}] has unknown channels"));
                }
            }
        }
        Ok(())
    }

    /// Units of pairable values for `scope`, one entry per coder.
    pub fn units(&self, scope: AlphaScope) -> Vec<Vec<u8>> {
        let channels: &[Channel] = match scope {
            AlphaScope::Channel(ref c) => std::slice::from_ref(c),
            AlphaScope::Overall => &Channel::ALL,
        };
        let mut units = Vec::new();
        for item in 0..self.items.len() {
            for ch in channels {
                let values = self
                    .judgments
                    .iter()
                    .filter_map(|row| row[item].as_ref().and_then(|cell| cell.get(ch).copied()))
                    .collect();
                units.push(values);
            }
        }
        units
    }
}

/// Krippendorff's alpha for `scope` over a validated matrix.
pub fn krippendorff_alpha(matrix: &AnnotationMatrix, scope: AlphaScope) -> Result<f64, AgreementError> {
    matrix.validate()?;
    if matrix.annotators.len() < 2 {
        return Err(AgreementError::InsufficientJudgments);
    }
    nominal_alpha(&matrix.units(scope))
}

/// Nominal alpha from the coincidence matrix: `1 - D_o / D_e`.
///
/// Each unit lists the values assigned by its coders; units with fewer than
/// two values are not pairable and are ignored.
pub fn nominal_alpha<V: Ord + Copy>(units: &[Vec<V>]) -> Result<f64, AgreementError> {
    let mut coincidence: BTreeMap<(V, V), f64> = BTreeMap::new();
    for values in units.iter().filter(|u| u.len() >= 2) {
        let weight = 1.0 / (values.len() - 1) as f64;
        for (i, &c) in values.iter().enumerate() {
            for (j, &k) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry((c, k)).or_default() += weight;
                }
            }
        }
    }
    if coincidence.is_empty() {
        return Err(AgreementError::InsufficientJudgments);
    }
    let mut marginals: BTreeMap<V, f64> = BTreeMap::new();
    for (&(c, _), &o) in &coincidence {
        *marginals.entry(c).or_default() += o;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence.iter().filter(|((c, k), _)| c != k).map(|(_, o)| o).sum();
    let mut expected = 0.0;
    for (c, nc) in &marginals {
        for (k, nk) in &marginals {
            if c != k {
                expected += nc * nk;
            }
        }
    }
    if expected == 0.0 {
        return Err(AgreementError::DegenerateData);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}
