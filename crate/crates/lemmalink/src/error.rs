use std::fmt;
use std::io;

use lemmalink_core::{LemmaRef, MappingError};
use serde::Serialize;
use thiserror::Error;

/// A problem with one field of a submitted lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        FieldError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("lexicon {0} is already registered")]
    DuplicateLexiconId(String),
    #[error("unknown lexicon {0}")]
    UnknownLexicon(String),
    #[error("corpus {0} is already registered")]
    DuplicateCorpusId(String),
    #[error("unknown corpus {0}")]
    UnknownCorpus(String),
    #[error("unknown lemma {0}")]
    UnknownLemma(LemmaRef),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("validation failed: {}", summarize(.0))]
    Validation(Vec<FieldError>),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("data directory: {0}")]
    Persistence(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn summarize(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("{}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Why an input row was not accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Outcome of a bulk load. `accepted + rejected.len() == total`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub total: usize,
    pub accepted: usize,
    pub rejected: Vec<RowError>,
}

impl IngestReport {
    pub fn reject(&mut self, line: usize, reason: impl fmt::Display) {
        self.total += 1;
        self.rejected.push(RowError {
            line,
            reason: reason.to_string(),
        });
    }

    pub fn accept(&mut self) {
        self.total += 1;
        self.accepted += 1;
    }
}
