use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::EventType;
use crate::text::sha256_hex;

const DEFAULT_BANK: &str = include_str!("../../../../data/questions.json");

/// Role-focused questions per event type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionBank {
    questions: BTreeMap<EventType, Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum QuestionBankError {
    #[error("cannot read question bank {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed question bank: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("question bank has no questions for event type {0}")]
    MissingType(EventType),
}

impl QuestionBank {
    /// The bank shipped in `data/questions.json`.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_BANK).expect("shipped question bank is valid")
    }

    pub fn load(path: &Path) -> Result<Self, QuestionBankError> {
        let raw = std::fs::read_to_string(path).map_err(|source| QuestionBankError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&raw)
    }

    /// Parses and checks that every event type has at least one question.
    pub fn parse(raw: &str) -> Result<Self, QuestionBankError> {
        let bank: Self = serde_json::from_str(raw)?;
        for ty in EventType::ALL {
            if bank.questions.get(&ty).is_none_or(Vec::is_empty) {
                return Err(QuestionBankError::MissingType(ty));
            }
        }
        Ok(bank)
    }

    pub fn questions(&self, ty: EventType) -> Option<&[String]> {
        self.questions.get(&ty).map(Vec::as_slice)
    }

    /// Stable content hash, recorded next to Arg scores.
    pub fn version_hash(&self) -> String {
        sha256_hex(&serde_json::to_string(&self.questions).expect("bank serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_all_types() {
        let bank = QuestionBank::builtin();
        for ty in EventType::ALL {
            assert!(!bank.questions(ty).unwrap().is_empty());
        }
        assert_eq!(bank.version_hash().len(), 64);
    }

    #[test]
    fn missing_type_is_rejected() {
        let err = QuestionBank::parse(r#"{"election": ["Who won?"]}"#).unwrap_err();
        assert!(matches!(err, QuestionBankError::MissingType(_)));
    }
}
