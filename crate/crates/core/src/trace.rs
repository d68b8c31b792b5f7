//! Teacher-forced token traces.
//!
//! A trace file is JSONL. Each method contributes a header line
//! `{"h": {...}}` followed by `token_count` lines `{"t": {...}}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::span::CharSpan;

/// Allowed gap between `prob` and `exp(logprob)`.
pub const PROB_LOGPROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub method_id: String,
    pub model_id: String,
    pub vocab_size: u32,
    pub tokenizer_fingerprint: String,
    pub token_count: usize,
    pub bos_present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenRecord {
    pub index: usize,
    pub token_id: u32,
    pub span: CharSpan,
    pub prob: Option<f64>,
    pub logprob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenTrace {
    pub header: TraceHeader,
    pub tokens: Vec<TokenRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
enum TraceLine {
    #[serde(rename = "h")]
    Header(TraceHeader),
    #[serde(rename = "t")]
    Token(TokenRecord),
}

impl TokenTrace {
    pub fn method_id(&self) -> &str {
        &self.header.method_id
    }

    /// Number of tokens that are not synthetic sequence markers.
    pub fn real_token_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.span.is_empty()).count()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::Trace {
            method_id: self.header.method_id.clone(),
            reason,
        };
        let h = &self.header;
        if h.vocab_size < 2 {
            return Err(fail(format!("vocab_size {} < 2", h.vocab_size)));
        }
        if h.token_count != self.tokens.len() {
            return Err(fail(format!(
                "header announces {} tokens, found {}",
                h.token_count,
                self.tokens.len()
            )));
        }
        let mut prev_end = 0;
        for (k, tok) in self.tokens.iter().enumerate() {
            if tok.index != k {
                return Err(fail(format!("token at position {k} has index {}", tok.index)));
            }
            if tok.token_id >= h.vocab_size {
                return Err(fail(format!("token {k}: id {} outside vocabulary", tok.token_id)));
            }
            if tok.span.start > tok.span.end {
                return Err(fail(format!("token {k}: inverted span {}", tok.span)));
            }
            if tok.span.start < prev_end {
                return Err(fail(format!("token {k}: span {} overlaps or precedes previous", tok.span)));
            }
            prev_end = tok.span.end;

            let synthetic = k == 0 && h.bos_present;
            if synthetic && !tok.span.is_empty() {
                return Err(fail("begin-of-sequence token must have an empty span".into()));
            }
            let must_be_null = k == 0 || synthetic;
            match (tok.prob, tok.logprob) {
                (None, None) if must_be_null => {}
                (None, _) | (_, None) if must_be_null => {
                    return Err(fail(format!("token {k}: prob and logprob must both be null")));
                }
                (Some(p), Some(lp)) if !must_be_null => {
                    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                        return Err(fail(format!("token {k}: prob {p} outside [0, 1]")));
                    }
                    if lp.is_nan() || lp > 0.0 || (p - lp.exp()).abs() > PROB_LOGPROB_TOLERANCE {
                        return Err(fail(format!("token {k}: prob {p} disagrees with logprob {lp}")));
                    }
                }
                _ => {
                    return Err(fail(format!(
                        "token {k}: probability must be null exactly at the first or begin-of-sequence position"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = TraceLine::Header(self.header.clone());
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for tok in &self.tokens {
            serde_json::to_writer(&mut out, &TraceLine::Token(tok.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Traces keyed by method id, all from one model.
#[derive(Debug, Clone, Default)]
pub struct TraceSet {
    pub model_id: Option<String>,
    pub traces: BTreeMap<String, TokenTrace>,
}

impl TraceSet {
    pub fn get(&self, method_id: &str) -> Option<&TokenTrace> {
        self.traces.get(method_id)
    }

    /// Reads and validates a trace file.
    ///
    /// Rejects duplicate methods, tokens without a preceding header, header
    /// counts that do not match, and traces from more than one model.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = TraceSet::default();
        let mut current: Option<TokenTrace> = None;
        let mut offset = 0;
        for line in reader.lines() {
            let line = line.map_err(|e| Error::io("<trace>", e))?;
            let start = offset;
            offset += line.len() + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TraceLine = serde_json::from_str(&line).map_err(|e| match Error::from_json(&line, &e) {
                Error::Parse { offset, message } => Error::Parse {
                    offset: start + offset,
                    message,
                },
                other => other,
            })?;
            match parsed {
                TraceLine::Header(header) => {
                    if let Some(done) = current.take() {
                        set.insert(done)?;
                    }
                    current = Some(TokenTrace {
                        tokens: Vec::with_capacity(header.token_count),
                        header,
                    });
                }
                TraceLine::Token(tok) => match current.as_mut() {
                    Some(trace) => trace.tokens.push(tok),
                    None => {
                        return Err(Error::Parse {
                            offset: start,
                            message: "token record before any header".into(),
                        })
                    }
                },
            }
        }
        if let Some(done) = current.take() {
            set.insert(done)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, trace: TokenTrace) -> Result<()> {
        trace.validate()?;
        match &self.model_id {
            Some(model) if *model != trace.header.model_id => {
                return Err(Error::Trace {
                    method_id: trace.header.method_id.clone(),
                    reason: format!("model `{}` differs from `{model}`", trace.header.model_id),
                })
            }
            None => self.model_id = Some(trace.header.model_id.clone()),
            _ => {}
        }
        let id = trace.header.method_id.clone();
        if self.traces.insert(id.clone(), trace).is_some() {
            return Err(Error::Trace {
                method_id: id,
                reason: "traced more than once".into(),
            });
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for trace in self.traces.values() {
            trace.write_jsonl(&mut out)?;
        }
        Ok(())
    }
}
