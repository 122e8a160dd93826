//! User input handling: structured term lists and free-text documents.

mod gazetteer;
mod ner;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use gazetteer::Gazetteer;
pub use ner::NerClient;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("input contains no usable entries")]
    EmptyInput,
    #[error("structured entry {index} contains a line break")]
    MultilineEntry { index: usize },
    #[error("expected {expected:?} input")]
    WrongMode { expected: InputMode },
    #[error("entity extractor unavailable: {0}")]
    ExtractorUnavailable(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Structured,
    Unstructured,
}

impl std::str::FromStr for InputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" => Ok(InputMode::Structured),
            "unstructured" => Ok(InputMode::Unstructured),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawInput {
    /// One term per entry.
    Structured(Vec<String>),
    /// A single document.
    Unstructured(String),
}

impl RawInput {
    pub fn structured<I, S>(entries: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: Vec<String> = entries.into_iter().map(Into::into).collect();
        if let Some(index) = entries.iter().position(|e| e.contains(['\n', '\r'])) {
            return Err(IngestError::MultilineEntry { index });
        }
        Ok(RawInput::Structured(entries))
    }

    pub fn unstructured(text: impl Into<String>) -> Self {
        RawInput::Unstructured(text.into())
    }

    /// Structured files hold one term per line; unstructured files are one document.
    pub fn from_file(path: &Path, mode: InputMode) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        match mode {
            InputMode::Structured => RawInput::structured(text.lines()),
            InputMode::Unstructured => Ok(RawInput::unstructured(text)),
        }
    }

    pub fn mode(&self) -> InputMode {
        match self {
            RawInput::Structured(_) => InputMode::Structured,
            RawInput::Unstructured(_) => InputMode::Unstructured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptSource {
    User,
    Extracted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Concept {
    pub raw_text: String,
    pub normalized_text: String,
    pub source: ConceptSource,
}

impl Concept {
    /// Returns `None` when the text normalizes to nothing.
    pub fn new(raw_text: impl Into<String>, source: ConceptSource) -> Option<Self> {
        let raw_text = raw_text.into();
        let normalized_text = normalize(&raw_text);
        if normalized_text.is_empty() {
            return None;
        }
        Some(Concept {
            raw_text,
            normalized_text,
            source,
        })
    }
}

/// Lowercases (Unicode-aware), collapses whitespace runs to one space and trims.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// One concept per non-blank entry, in input order.
pub fn parse_structured(input: &RawInput) -> Result<Vec<Concept>, IngestError> {
    let RawInput::Structured(entries) = input else {
        return Err(IngestError::WrongMode {
            expected: InputMode::Structured,
        });
    };
    let concepts: Vec<Concept> = entries
        .iter()
        .filter_map(|e| Concept::new(e.clone(), ConceptSource::User))
        .collect();
    if concepts.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(concepts)
}

/// An entity mention located in a document. Offsets are byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

pub trait EntityExtractor {
    fn extract(&self, text: &str) -> Result<Vec<EntitySpan>, IngestError>;
}

/// Runs `extractor` over a document and returns distinct concepts in order of
/// first occurrence. Offsets are dropped.
pub fn extract_entities(
    input: &RawInput,
    extractor: &dyn EntityExtractor,
) -> Result<Vec<Concept>, IngestError> {
    let RawInput::Unstructured(text) = input else {
        return Err(IngestError::WrongMode {
            expected: InputMode::Unstructured,
        });
    };
    if text.trim().is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let mut spans = extractor.extract(text)?;
    spans.sort_by_key(|s| s.start);

    let mut seen = HashSet::new();
    Ok(spans
        .into_iter()
        .filter_map(|s| Concept::new(s.text, ConceptSource::Extracted))
        .filter(|c| seen.insert(c.normalized_text.clone()))
        .collect())
}
