//! Ingestion of `pylint --output-format=json` reports.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::location::{LineIndex, SourceLocation};
use super::taxonomy::{SmellTaxonomy, SmellType};
use super::SmellInstance;
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct Message {
    #[serde(rename = "message-id")]
    message_id: Option<String>,
    symbol: Option<String>,
    line: Option<usize>,
    column: Option<usize>,
    #[serde(rename = "endLine")]
    end_line: Option<usize>,
    #[serde(rename = "endColumn")]
    end_column: Option<usize>,
}

/// A smell reported by the analyzer before its location is mapped onto text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportedSmell {
    pub method_id: String,
    pub smell: SmellType,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: Option<usize>,
    pub end_col: Option<usize>,
}

impl ReportedSmell {
    /// True when the analyzer did not give a complete end position.
    pub fn is_degraded(&self) -> bool {
        self.end_line.is_none() || self.end_col.is_none()
    }

    /// Completes the location against the method text and maps it to characters.
    ///
    /// A missing end position is replaced by the end of the end line (or of
    /// the start line when the end line is also missing).
    pub fn resolve(&self, lines: &LineIndex) -> Result<SmellInstance> {
        let end_line = self.end_line.unwrap_or(self.start_line);
        let end_col = match self.end_col {
            Some(col) if self.end_line.is_some() => col,
            _ => lines.line_len(end_line).unwrap_or(0),
        };
        let location = SourceLocation::new(self.start_line, self.start_col, end_line, end_col);
        let char_span = lines.resolve(location)?;
        Ok(SmellInstance {
            method_id: self.method_id.clone(),
            smell: self.smell.clone(),
            location,
            char_span,
            degraded: self.is_degraded(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportDiagnostics {
    /// Messages outside the taxonomy, keyed by message-id (or symbol).
    pub skipped: BTreeMap<String, usize>,
    /// In-taxonomy messages whose end position was incomplete.
    pub degraded: usize,
    /// In-taxonomy messages carrying no line number at all.
    pub unlocated: usize,
}

impl ReportDiagnostics {
    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn merge(&mut self, other: &ReportDiagnostics) {
        for (id, n) in &other.skipped {
            *self.skipped.entry(id.clone()).or_default() += n;
        }
        self.degraded += other.degraded;
        self.unlocated += other.unlocated;
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedReport {
    pub smells: Vec<ReportedSmell>,
    pub diagnostics: ReportDiagnostics,
}

/// Parses one report, keeping only messages whose id or symbol is in `taxonomy`.
pub fn parse_pylint_report(
    report_text: &str,
    taxonomy: &SmellTaxonomy,
    method_id: &str,
) -> Result<ParsedReport> {
    let messages: Vec<Message> =
        serde_json::from_str(report_text).map_err(|e| Error::from_json(report_text, &e))?;

    let mut parsed = ParsedReport::default();
    for msg in messages {
        let Some(smell) = taxonomy.lookup(msg.message_id.as_deref(), msg.symbol.as_deref())
        else {
            let key = msg
                .message_id
                .or(msg.symbol)
                .unwrap_or_else(|| "<unknown>".into());
            *parsed.diagnostics.skipped.entry(key).or_default() += 1;
            continue;
        };
        let Some(start_line) = msg.line else {
            parsed.diagnostics.unlocated += 1;
            continue;
        };
        let reported = ReportedSmell {
            method_id: method_id.to_string(),
            smell: smell.clone(),
            start_line,
            start_col: msg.column.unwrap_or(0),
            end_line: msg.end_line,
            end_col: msg.end_column,
        };
        if reported.is_degraded() {
            parsed.diagnostics.degraded += 1;
        }
        parsed.smells.push(reported);
    }
    Ok(parsed)
}
