use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read run file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("line {line}: video {video_id} listed twice for event {event_id}")]
    DuplicateEntry {
        line: usize,
        event_id: String,
        video_id: String,
    },
    #[error("event {0} is not in the run")]
    UnknownEvent(String),
    #[error("k must be positive")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub video_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedRun {
    /// Per event, entries in rank order: scores non-increasing, ids unique.
    pub events: BTreeMap<String, Vec<RunEntry>>,
    pub run_tag: String,
}

impl RankedRun {
    /// Builds a run from per-event lists, re-sorting each by descending
    /// score (stable).
    pub fn from_lists(run_tag: impl Into<String>, lists: BTreeMap<String, Vec<RunEntry>>) -> Self {
        let mut run = Self {
            events: lists,
            run_tag: run_tag.into(),
        };
        for entries in run.events.values_mut() {
            entries.sort_by(|a, b| b.score.total_cmp(&a.score));
        }
        run
    }

    pub fn ranking(&self, event_id: &str) -> Option<&[RunEntry]> {
        self.events.get(event_id).map(Vec::as_slice)
    }

    /// The first `min(k, available)` video ids for `event_id`.
    pub fn top_k(&self, event_id: &str, k: usize) -> Result<Vec<String>, RunError> {
        if k == 0 {
            return Err(RunError::ZeroK);
        }
        let entries = self
            .events
            .get(event_id)
            .ok_or_else(|| RunError::UnknownEvent(event_id.to_string()))?;
        Ok(entries.iter().take(k).map(|e| e.video_id.clone()).collect())
    }
}

pub fn load_run(path: &Path) -> Result<RankedRun, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_run(&text)
}

/// Parses run-file text. Blank lines and `#` comments are skipped. The rank
/// column must be an integer but ordering comes from the score column.
pub fn parse_run(text: &str) -> Result<RankedRun, RunError> {
    let mut lists: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    let mut seen = HashSet::new();
    let mut tags: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        let malformed = |detail: String| RunError::MalformedLine { line, detail };
        let [event_id, _q0, video_id, rank, score, tag] = cols[..] else {
            return Err(malformed(format!("expected 6 columns, found {}", cols.len())));
        };
        rank.parse::<i64>()
            .map_err(|_| malformed(format!("rank {rank:?} is not an integer")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| malformed(format!("score {score:?} is not a finite number")))?;
        if !seen.insert((event_id.to_string(), video_id.to_string())) {
            return Err(RunError::DuplicateEntry {
                line,
                event_id: event_id.into(),
                video_id: video_id.into(),
            });
        }
        if !tags.iter().any(|t| t == tag) {
            tags.push(tag.to_string());
        }
        lists.entry(event_id.to_string()).or_default().push(RunEntry {
            video_id: video_id.to_string(),
            score,
        });
    }

    for (event, entries) in &lists {
        if entries.windows(2).any(|w| w[1].score > w[0].score) {
            log::warn!("run entries for event {event} are not in descending score order; re-sorting");
        }
    }
    if tags.len() > 1 {
        log::warn!("run file mixes run tags {tags:?}; using {:?}", tags[0]);
    }
    Ok(RankedRun::from_lists(
        tags.into_iter().next().unwrap_or_default(),
        lists,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_line_run_in_score_order() {
        let run = parse_run("e1 Q0 v1 1 0.9 mm\ne1 Q0 v2 2 0.5 mm\n# note\n\ne1 Q0 v3 3 0.1 mm\n").unwrap();
        assert_eq!(run.run_tag, "mm");
        assert_eq!(run.top_k("e1", 5).unwrap(), vec!["v1", "v2", "v3"]);
    }

    #[test]
    fn shuffled_lines_are_resorted_stably() {
        let run = parse_run("e1 Q0 a 3 0.1 t\ne1 Q0 b 1 0.9 t\ne1 Q0 c 2 0.5 t\ne1 Q0 d 4 0.5 t\n").unwrap();
        assert_eq!(run.top_k("e1", 10).unwrap(), vec!["b", "c", "d", "a"]);
    }

    #[test]
    fn duplicate_pair_is_rejected() {
        let err = parse_run("e1 Q0 v1 1 0.9 t\ne1 Q0 v1 2 0.5 t\n").unwrap_err();
        assert!(matches!(err, RunError::DuplicateEntry { line: 2, .. }));
    }

    #[test]
    fn same_video_under_two_events_is_fine() {
        assert!(parse_run("e1 Q0 v1 1 0.9 t\ne2 Q0 v1 1 0.9 t\n").is_ok());
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = parse_run("e1 Q0 v1 1 0.9 t\ne1 Q0 v2 2\n").unwrap_err();
        assert!(matches!(err, RunError::MalformedLine { line: 2, .. }));
        let err = parse_run("e1 Q0 v1 1 high t\n").unwrap_err();
        assert!(matches!(err, RunError::MalformedLine { line: 1, .. }));
        let err = parse_run("e1 Q0 v1 first 0.3 t\n").unwrap_err();
        assert!(matches!(err, RunError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn top_k_boundaries() {
        let text: String = (0..10).map(|i| format!("e Q0 v{i} {i} {} t\n", 10 - i)).collect();
        let run = parse_run(&text).unwrap();
        assert_eq!(run.top_k("e", 5).unwrap(), vec!["v0", "v1", "v2", "v3", "v4"]);
        let short = parse_run("e Q0 a 1 3 t\ne Q0 b 2 2 t\ne Q0 c 3 1 t\n").unwrap();
        assert_eq!(short.top_k("e", 5).unwrap().len(), 3);
        assert!(matches!(short.top_k("zzz", 5), Err(RunError::UnknownEvent(_))));
        assert!(matches!(short.top_k("e", 0), Err(RunError::ZeroK)));
    }
}
