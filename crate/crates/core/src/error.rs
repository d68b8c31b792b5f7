use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::SourceLocation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("cannot resolve location {location} in method text: {reason}")]
    LocationResolution {
        location: SourceLocation,
        reason: String,
    },

    #[error("no token count for method `{0}`")]
    MissingTokenCount(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),

    #[error("invalid trace for method `{method_id}`: {reason}")]
    Trace { method_id: String, reason: String },

    #[error("span [{start}, {end}) of method `{method_id}` overlaps no token")]
    Alignment {
        method_id: String,
        start: usize,
        end: usize,
    },

    #[error("span [{start}, {end}) of method `{method_id}` has no scored token")]
    UnscorableSpan {
        method_id: String,
        start: usize,
        end: usize,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid score file: {0}")]
    ScoreFile(String),

    #[error("missing traces for {} method(s): {}", .0.len(), .0.join(", "))]
    MissingTraces(Vec<String>),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn from_json(text: &str, err: &serde_json::Error) -> Self {
        Error::Parse {
            offset: byte_offset(text, err.line(), err.column()),
            message: err.to_string(),
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}

/// Converts serde_json's 1-based (line, column) into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_offset_counts_previous_lines() {
        let text = "[\n  {\"a\": 1,}\n]";
        let err = serde_json::from_str::<serde_json::Value>(text).unwrap_err();
        let Error::Parse { offset, .. } = Error::from_json(text, &err) else {
            panic!("expected parse error");
        };
        assert_eq!(&text[offset..=offset], "}");
    }
}
