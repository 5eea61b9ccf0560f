use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::agreement::AnnotationMatrix;
use super::model::{EventTopic, Modality, Subclaim, VideoRecord};
use super::Corpus;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema violation in {file}: {detail}")]
    SchemaViolation { file: String, detail: String },
    #[error("dangling reference in {file}: {detail}")]
    DanglingReference { file: String, detail: String },
    #[error("corpus is empty")]
    EmptyCorpus,
}

fn schema(file: &str, detail: impl Into<String>) -> CorpusError {
    CorpusError::SchemaViolation {
        file: file.to_string(),
        detail: detail.into(),
    }
}

fn dangling(file: &str, detail: impl Into<String>) -> CorpusError {
    CorpusError::DanglingReference {
        file: file.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VideoEntry {
    id: String,
    uri: String,
    duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transcript_path: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    ocr_present: bool,
}

const EVENT_FIELDS: &[&str] = &[
    "id",
    "name",
    "event_type",
    "year",
    "reference_article",
    "relevant_video_ids",
];
const VIDEO_FIELDS: &[&str] = &["id", "uri", "duration_s", "transcript_path", "ocr_present"];
const SUBCLAIM_FIELDS: &[&str] = &["id", "event_id", "text", "support"];

fn read_json(path: &Path) -> Result<Value, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::MissingFile(path.to_path_buf()));
    }
    let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = file_name(path);
    serde_json::from_str(&raw).map_err(|e| schema(&name, format!("not valid JSON: {e}")))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Deserializes each element of a top-level array, naming the element
/// index on failure and warning about unknown fields.
fn parse_array<T: DeserializeOwned>(value: Value, file: &str, known: &[&str]) -> Result<Vec<T>, CorpusError> {
    let Value::Array(items) = value else {
        return Err(schema(file, "top level must be an array"));
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            if let Value::Object(map) = &item {
                for key in map.keys().filter(|k| !known.contains(&k.as_str())) {
                    log::warn!("{file}[{i}]: ignoring unknown field `{key}`");
                }
            }
            serde_path_to_error::deserialize(item).map_err(|e| {
                let field = e.path().to_string();
                schema(file, format!("[{i}].{field}: {}", e.into_inner()))
            })
        })
        .collect()
}

/// Loads and cross-checks the corpus under `root`.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    let events: Vec<EventTopic> = parse_array(read_json(&root.join("events.json"))?, "events.json", EVENT_FIELDS)?;
    let entries: Vec<VideoEntry> = parse_array(read_json(&root.join("videos.json"))?, "videos.json", VIDEO_FIELDS)?;
    let subclaims: Vec<Subclaim> = parse_array(
        read_json(&root.join("subclaims.json"))?,
        "subclaims.json",
        SUBCLAIM_FIELDS,
    )?;

    let mut videos = Vec::with_capacity(entries.len());
    for entry in entries {
        let transcript = match &entry.transcript_path {
            None => None,
            Some(rel) => {
                let path = root.join(rel);
                if !path.exists() {
                    return Err(CorpusError::MissingFile(path));
                }
                Some(std::fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })?)
            }
        };
        videos.push(VideoRecord {
            id: entry.id,
            uri: entry.uri,
            duration_s: entry.duration_s,
            transcript,
            ocr_present: entry.ocr_present,
        });
    }

    let annotations_path = root.join("annotations.json");
    let annotations = if annotations_path.exists() {
        let value = read_json(&annotations_path)?;
        let matrix: AnnotationMatrix =
            serde_json::from_value(value).map_err(|e| schema("annotations.json", e.to_string()))?;
        Some(matrix)
    } else {
        None
    };

    Corpus::from_parts(events, videos, subclaims, annotations)
}

pub(super) fn validate(
    events: &[EventTopic],
    videos: &[VideoRecord],
    subclaims: &[Subclaim],
    annotations: Option<&AnnotationMatrix>,
) -> Result<(), CorpusError> {
    let mut video_ids = HashSet::new();
    for (i, v) in videos.iter().enumerate() {
        if v.id.trim().is_empty() {
            return Err(schema("videos.json", format!("[{i}].id is empty")));
        }
        if !video_ids.insert(v.id.as_str()) {
            return Err(schema("videos.json", format!("[{i}].id `{}` is not unique", v.id)));
        }
        if !(v.duration_s.is_finite() && v.duration_s >= 0.0) {
            return Err(schema(
                "videos.json",
                format!("[{i}].duration_s must be a non-negative number"),
            ));
        }
        if v.uri.is_empty() || v.uri.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(schema(
                "videos.json",
                format!("[{i}].uri `{}` is not a valid URI", v.uri),
            ));
        }
    }

    let mut event_ids = HashSet::new();
    for (i, e) in events.iter().enumerate() {
        if e.id.trim().is_empty() {
            return Err(schema("events.json", format!("[{i}].id is empty")));
        }
        if !event_ids.insert(e.id.as_str()) {
            return Err(schema("events.json", format!("[{i}].id `{}` is not unique", e.id)));
        }
        if e.reference_article.trim().is_empty() {
            return Err(schema("events.json", format!("[{i}].reference_article is empty")));
        }
        if e.relevant_video_ids.is_empty() {
            return Err(schema("events.json", format!("[{i}].relevant_video_ids is empty")));
        }
        let mut seen = HashSet::new();
        for vid in &e.relevant_video_ids {
            if !seen.insert(vid) {
                return Err(schema(
                    "events.json",
                    format!("[{i}].relevant_video_ids repeats `{vid}`"),
                ));
            }
            if !video_ids.contains(vid.as_str()) {
                return Err(dangling(
                    "events.json",
                    format!("event `{}` lists unknown video `{vid}`", e.id),
                ));
            }
        }
    }

    let mut claim_ids = HashSet::new();
    for (i, c) in subclaims.iter().enumerate() {
        if !claim_ids.insert(c.id.as_str()) {
            return Err(schema("subclaims.json", format!("[{i}].id `{}` is not unique", c.id)));
        }
        if c.text.trim().is_empty() {
            return Err(schema("subclaims.json", format!("[{i}].text is empty")));
        }
        if !event_ids.contains(c.event_id.as_str()) {
            return Err(dangling(
                "subclaims.json",
                format!("subclaim `{}` references unknown event `{}`", c.id, c.event_id),
            ));
        }
        if let Some(vid) = c.support.keys().find(|v| !video_ids.contains(v.as_str())) {
            return Err(dangling(
                "subclaims.json",
                format!("subclaim `{}` references unknown video `{vid}`", c.id),
            ));
        }
    }

    if let Some(matrix) = annotations {
        matrix
            .validate()
            .map_err(|e| schema("annotations.json", e.to_string()))?;
        for item in &matrix.items {
            if !claim_ids.contains(item.claim_id.as_str()) {
                return Err(dangling(
                    "annotations.json",
                    format!("unknown subclaim `{}`", item.claim_id),
                ));
            }
            if !video_ids.contains(item.video_id.as_str()) {
                return Err(dangling(
                    "annotations.json",
                    format!("unknown video `{}`", item.video_id),
                ));
            }
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let body = serde_json::to_string_pretty(value).expect("corpus types serialize");
    std::fs::write(path, body + "\n").map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `corpus` under `root` in the same layout [`load_corpus`] reads.
/// Transcripts go to `transcripts/<video id>.txt`.
pub fn write_corpus(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    std::fs::create_dir_all(root).map_err(io(root))?;
    write_json(&root.join("events.json"), &corpus.events())?;

    let mut entries = Vec::with_capacity(corpus.videos().len());
    for v in corpus.videos() {
        let transcript_path = match &v.transcript {
            None => None,
            Some(text) => {
                let dir = root.join("transcripts");
                std::fs::create_dir_all(&dir).map_err(io(&dir))?;
                let rel = format!("transcripts/{}.txt", v.id);
                let path = root.join(&rel);
                std::fs::write(&path, text).map_err(io(&path))?;
                Some(rel)
            }
        };
        entries.push(VideoEntry {
            id: v.id.clone(),
            uri: v.uri.clone(),
            duration_s: v.duration_s,
            transcript_path,
            ocr_present: v.ocr_present,
        });
    }
    write_json(&root.join("videos.json"), &entries)?;

    #[derive(Serialize)]
    struct SubclaimOut<'a> {
        id: &'a str,
        event_id: &'a str,
        text: &'a str,
        support: &'a BTreeMap<String, BTreeSet<Modality>>,
    }
    let claims: Vec<SubclaimOut> = corpus
        .subclaims()
        .iter()
        .map(|c| SubclaimOut {
            id: &c.id,
            event_id: &c.event_id,
            text: &c.text,
            support: &c.support,
        })
        .collect();
    write_json(&root.join("subclaims.json"), &claims)?;

    if let Some(matrix) = corpus.annotations() {
        write_json(&root.join("annotations.json"), matrix)?;
    }
    Ok(())
}
