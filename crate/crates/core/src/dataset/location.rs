//! Analyzer locations and their mapping onto character offsets.
//!
//! Locations follow the analyzer's JSON convention: 1-based lines, 0-based
//! columns, exclusive end column. Columns count Unicode scalar values; a tab
//! is one character.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::span::CharSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLocation {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl SourceLocation {
    pub fn new(start_line: usize, start_col: usize, end_line: usize, end_col: usize) -> Self {
        SourceLocation {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

/// Character offset of each line start plus each line's length in characters.
#[derive(Debug)]
pub struct LineIndex {
    lines: Vec<(usize, usize)>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut lines = Vec::new();
        let mut offset = 0;
        for line in text.split('\n') {
            let len = line.chars().count();
            lines.push((offset, len));
            offset += len + 1;
        }
        LineIndex { lines }
    }

    /// Length in characters of a 1-based line.
    pub fn line_len(&self, line: usize) -> Option<usize> {
        line.checked_sub(1)
            .and_then(|i| self.lines.get(i))
            .map(|&(_, len)| len)
    }

    fn offset(&self, line: usize, col: usize) -> std::result::Result<usize, String> {
        let (start, len) = line
            .checked_sub(1)
            .and_then(|i| self.lines.get(i))
            .copied()
            .ok_or_else(|| format!("line {line} does not exist ({} lines)", self.lines.len()))?;
        if col > len {
            return Err(format!("column {col} is beyond line {line} of length {len}"));
        }
        Ok(start + col)
    }

    pub fn resolve(&self, location: SourceLocation) -> Result<CharSpan> {
        let fail = |reason: String| Error::LocationResolution { location, reason };
        let a = self
            .offset(location.start_line, location.start_col)
            .map_err(fail)?;
        let b = self.offset(location.end_line, location.end_col).map_err(fail)?;
        if b <= a {
            return Err(fail(format!("end offset {b} does not follow start offset {a}")));
        }
        Ok(CharSpan::new(a, b))
    }
}

/// Maps a location onto a half-open character range of `source_text`.
pub fn resolve_char_span(source_text: &str, location: SourceLocation) -> Result<CharSpan> {
    LineIndex::new(source_text).resolve(location)
}
