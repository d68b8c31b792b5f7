//! Smell instances, the methods they live in, and dataset curation.

mod curation;
mod location;
mod manifest;
mod pylint;
mod sample_size;
mod taxonomy;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use curation::{
    curate,
    deduplicate_methods, filter_by_token_budget, sample_per_smell, CurationConfig,
    CurationDiagnostics,
};
pub use location::{resolve_char_span, LineIndex, SourceLocation};
pub use manifest::{DatasetManifest, MANIFEST_SCHEMA_VERSION};
pub use pylint::{parse_pylint_report, ParsedReport, ReportDiagnostics, ReportedSmell};
pub use sample_size::validation_sample_size;
pub use taxonomy::{Category, SmellTaxonomy, SmellType};

use crate::error::{Error, Result};
use crate::span::CharSpan;

/// Hex SHA-256 digest of a method's text.
pub fn content_hash(source_text: &str) -> String {
    hex::encode(Sha256::digest(source_text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method_id: String,
    pub origin: String,
    pub content_hash: String,
    pub source_text: String,
}

impl MethodRecord {
    pub fn new(method_id: impl Into<String>, origin: impl Into<String>, source_text: impl Into<String>) -> Result<Self> {
        let source_text = source_text.into();
        let method_id = method_id.into();
        if source_text.is_empty() {
            return Err(Error::InvalidArgument(format!("method `{method_id}` has empty source text")));
        }
        Ok(MethodRecord {
            content_hash: content_hash(&source_text),
            method_id,
            origin: origin.into(),
            source_text,
        })
    }

    pub fn char_len(&self) -> usize {
        self.source_text.chars().count()
    }
}

/// One occurrence of a smell type at a resolved location inside a method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmellInstance {
    pub method_id: String,
    pub smell: SmellType,
    pub location: SourceLocation,
    pub char_span: CharSpan,
    /// The analyzer gave no exact end position; the span runs to end of line.
    pub degraded: bool,
}

impl SmellInstance {
    pub fn smell_id(&self) -> &str {
        &self.smell.id
    }
}
