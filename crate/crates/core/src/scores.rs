//! Score file: per-instance scores and per-smell estimates for one model.
//!
//! JSONL with a header line, then instance scores sorted by
//! (smell_id, method_id, char_span), then exclusions, then one summary line
//! per smell type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psc::{GlobalEstimate, PscScore, Statistic};
use crate::span::CharSpan;

pub const SCORE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreHeader {
    pub schema_version: u32,
    pub model_id: String,
    pub manifest_digest: String,
    /// Smell ids of the manifest taxonomy, in taxonomy order.
    pub taxonomy: Vec<String>,
    pub statistic: Statistic,
    pub threshold: f64,
}

/// A manifest instance that could not be scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub method_id: String,
    pub smell_id: String,
    pub char_span: CharSpan,
    pub excluded: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub header: ScoreHeader,
    pub scores: Vec<PscScore>,
    pub exclusions: Vec<Exclusion>,
    pub estimates: Vec<GlobalEstimate>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header(ScoreHeader),
    Score(PscScore),
    Exclusion(Exclusion),
    Estimate(GlobalEstimate),
}

impl ScoreFile {
    /// Sorts scores and exclusions into canonical order.
    pub fn normalize(&mut self) {
        self.scores.sort_by(|a, b| {
            (&a.smell_id, &a.method_id, a.char_span).cmp(&(&b.smell_id, &b.method_id, b.char_span))
        });
        self.exclusions.sort_by(|a, b| {
            (&a.smell_id, &a.method_id, a.char_span).cmp(&(&b.smell_id, &b.method_id, b.char_span))
        });
        self.estimates.sort_by(|a, b| a.smell_id.cmp(&b.smell_id));
    }

    /// Scores grouped by smell id.
    pub fn values_by_smell(&self) -> BTreeMap<&str, Vec<f64>> {
        let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for s in &self.scores {
            out.entry(s.smell_id.as_str()).or_default().push(s.value);
        }
        out
    }

    pub fn estimate(&self, smell_id: &str) -> Option<&GlobalEstimate> {
        self.estimates.iter().find(|e| e.smell_id == smell_id)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("score lines serialize"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        self.scores.iter().for_each(|s| push(&Line::Score(s.clone())));
        self.exclusions.iter().for_each(|e| push(&Line::Exclusion(e.clone())));
        self.estimates.iter().for_each(|e| push(&Line::Estimate(e.clone())));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut file = ScoreFile {
            header: ScoreHeader {
                schema_version: SCORE_SCHEMA_VERSION,
                model_id: String::new(),
                manifest_digest: String::new(),
                taxonomy: Vec::new(),
                statistic: Statistic::Mean,
                threshold: 0.5,
            },
            scores: Vec::new(),
            exclusions: Vec::new(),
            estimates: Vec::new(),
        };
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(line).map_err(|e| match Error::from_json(line, &e) {
                Error::Parse { offset, message } => Error::Parse {
                    offset: start + offset,
                    message,
                },
                other => other,
            })?;
            match parsed {
                Line::Header(h) => {
                    if header.replace(()).is_some() {
                        return Err(Error::ScoreFile("more than one header".into()));
                    }
                    if h.schema_version != SCORE_SCHEMA_VERSION {
                        return Err(Error::ScoreFile(format!("unsupported schema version {}", h.schema_version)));
                    }
                    file.header = h;
                }
                _ if header.is_none() => {
                    return Err(Error::ScoreFile("first line must be the header".into()));
                }
                Line::Score(s) => file.scores.push(s),
                Line::Exclusion(e) => file.exclusions.push(e),
                Line::Estimate(e) => file.estimates.push(e),
            }
        }
        if header.is_none() {
            return Err(Error::ScoreFile("missing header".into()));
        }
        Ok(file)
    }
}
