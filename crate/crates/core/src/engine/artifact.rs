//! `runs/{event_id}/{method}.json` files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cite::SentenceCitation;
use super::run::RunOutput;
use super::{Article, Method, Provenance, SummaryTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub event_id: String,
    pub body: String,
    pub citations: Vec<SentenceCitation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub article: ArticleRecord,
    pub traces: Vec<SummaryTrace>,
    pub provenance: Provenance,
}

impl RunArtifact {
    pub fn method(&self) -> Method {
        self.provenance.config.method
    }

    pub fn into_output(self) -> RunOutput {
        RunOutput {
            article: Article {
                event_id: self.article.event_id,
                body: self.article.body,
                citations: self.article.citations,
                provenance: self.provenance,
            },
            traces: self.traces,
        }
    }
}

impl From<&RunOutput> for RunArtifact {
    fn from(out: &RunOutput) -> Self {
        Self {
            article: ArticleRecord {
                event_id: out.article.event_id.clone(),
                body: out.article.body.clone(),
                citations: out.article.citations.clone(),
            },
            traces: out.traces.clone(),
            provenance: out.article.provenance.clone(),
        }
    }
}

pub fn run_artifact_path(out_dir: &Path, event_id: &str, method: Method) -> PathBuf {
    out_dir.join(event_id).join(format!("{method}.json"))
}

pub fn write_run_artifact(out_dir: &Path, output: &RunOutput) -> std::io::Result<PathBuf> {
    let path = run_artifact_path(
        out_dir,
        &output.article.event_id,
        output.article.provenance.config.method,
    );
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let body = serde_json::to_string_pretty(&RunArtifact::from(output)).expect("artifact serializes");
    std::fs::write(&path, body + "\n")?;
    Ok(path)
}

pub fn read_run_artifact(path: &Path) -> std::io::Result<RunArtifact> {
    let raw = std::fs::read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
