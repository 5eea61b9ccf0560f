use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

#[derive(Debug, thiserror::Error)]
pub enum QrelsError {
    #[error("cannot read qrels file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("qrels line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
}

/// Per event, video id to non-negative relevance grade.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Qrels(pub BTreeMap<String, BTreeMap<String, u32>>);

impl Qrels {
    /// Grade 1 for every relevant video of every event.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self(
            corpus
                .events()
                .iter()
                .map(|e| {
                    (
                        e.id.clone(),
                        e.relevant_video_ids.iter().map(|v| (v.clone(), 1)).collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, QrelsError> {
        let text = std::fs::read_to_string(path).map_err(|source| QrelsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `event_id 0 video_id grade` lines; later lines override
    /// earlier ones for the same pair.
    pub fn parse(text: &str) -> Result<Self, QrelsError> {
        let mut out: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split_whitespace().collect();
            let [event, _, video, grade] = cols[..] else {
                return Err(QrelsError::MalformedLine {
                    line: i + 1,
                    detail: format!("expected 4 columns, found {}", cols.len()),
                });
            };
            let grade = grade.parse::<u32>().map_err(|_| QrelsError::MalformedLine {
                line: i + 1,
                detail: format!("grade {grade:?} is not a non-negative integer"),
            })?;
            out.entry(event.into()).or_default().insert(video.into(), grade);
        }
        Ok(Self(out))
    }

    pub fn grades(&self, event_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.0.get(event_id)
    }

    pub fn grade(&self, event_id: &str, video_id: &str) -> u32 {
        self.grades(event_id)
            .and_then(|g| g.get(video_id))
            .copied()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grades() {
        let q = Qrels::parse("e1 0 v1 1\ne1 0 v2 0\n# c\ne2 0 v9 2\n").unwrap();
        assert_eq!(q.grade("e1", "v1"), 1);
        assert_eq!(q.grade("e1", "v2"), 0);
        assert_eq!(q.grade("e2", "v9"), 2);
        assert_eq!(q.grade("e2", "nope"), 0);
    }

    #[test]
    fn rejects_negative_grade() {
        assert!(matches!(
            Qrels::parse("e1 0 v1 -1\n"),
            Err(QrelsError::MalformedLine { line: 1, .. })
        ));
    }
}
