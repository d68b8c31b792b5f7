//! Propensity scores over smell spans.
//!
//! A smell's character span is aligned to the trace tokens whose spans
//! intersect it; the probabilities of those tokens are then reduced to a
//! single score. Positions without a probability (the first token or a
//! begin-of-sequence marker) are skipped, not counted as zero.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{MethodRecord, SmellInstance};
use crate::error::{Error, Result};
use crate::span::CharSpan;
use crate::summary;
use crate::trace::TokenTrace;

/// Default propensity threshold: at or above it a smell is more likely to be
/// produced than not.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
    Median,
}

impl Statistic {
    pub fn apply(self, values: &[f64]) -> Option<f64> {
        match self {
            Statistic::Mean => summary::mean(values),
            Statistic::Median => summary::median(values),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "median" => Ok(Statistic::Median),
            other => Err(Error::Config(format!("unknown statistic `{other}` (mode is not supported)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanAlignment {
    pub method_id: String,
    pub char_span: CharSpan,
    /// Half-open range of trace token indices.
    pub token_range: Range<usize>,
    /// In-range tokens carrying no probability.
    pub dropped_positions: usize,
}

/// Finds the smallest contiguous token range holding every token whose
/// (non-empty) span intersects `char_span`.
pub fn align_span(trace: &TokenTrace, char_span: CharSpan, source_len: usize) -> Result<SpanAlignment> {
    let method_id = trace.method_id().to_string();
    if char_span.is_empty() || char_span.end > source_len {
        return Err(Error::InvalidArgument(format!(
            "span {char_span} of `{method_id}` is empty or exceeds text length {source_len}"
        )));
    }
    let tokens = &trace.tokens;
    // Token spans are sorted and disjoint, so both starts and ends are non-decreasing.
    let mut lo = tokens.partition_point(|t| t.span.end <= char_span.start);
    let mut hi = tokens.partition_point(|t| t.span.start < char_span.end);
    while lo < hi && !tokens[lo].span.overlaps(&char_span) {
        lo += 1;
    }
    while hi > lo && !tokens[hi - 1].span.overlaps(&char_span) {
        hi -= 1;
    }
    if lo == hi {
        return Err(Error::Alignment {
            method_id,
            start: char_span.start,
            end: char_span.end,
        });
    }
    let dropped_positions = tokens[lo..hi].iter().filter(|t| t.prob.is_none()).count();
    if dropped_positions == hi - lo {
        return Err(Error::UnscorableSpan {
            method_id,
            start: char_span.start,
            end: char_span.end,
        });
    }
    Ok(SpanAlignment {
        method_id,
        char_span,
        token_range: lo..hi,
        dropped_positions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PscScore {
    pub method_id: String,
    pub smell_id: String,
    pub char_span: CharSpan,
    #[serde(rename = "psc")]
    pub value: f64,
    #[serde(rename = "tokens_scored")]
    pub token_count_scored: usize,
    pub statistic: Statistic,
}

/// Reduces the probabilities inside an alignment to one score.
pub fn aggregate(
    trace: &TokenTrace,
    alignment: &SpanAlignment,
    smell_id: &str,
    statistic: Statistic,
) -> Result<PscScore> {
    let probs: Vec<f64> = trace.tokens[alignment.token_range.clone()]
        .iter()
        .filter_map(|t| t.prob)
        .collect();
    let value = statistic.apply(&probs).ok_or_else(|| Error::UnscorableSpan {
        method_id: alignment.method_id.clone(),
        start: alignment.char_span.start,
        end: alignment.char_span.end,
    })?;
    Ok(PscScore {
        method_id: alignment.method_id.clone(),
        smell_id: smell_id.to_string(),
        char_span: alignment.char_span,
        value,
        token_count_scored: probs.len(),
        statistic,
    })
}

pub fn score_instance(
    trace: &TokenTrace,
    method: &MethodRecord,
    instance: &SmellInstance,
    statistic: Statistic,
) -> Result<PscScore> {
    if trace.method_id() != instance.method_id || method.method_id != instance.method_id {
        return Err(Error::Invariant(format!(
            "instance of `{}` scored against trace `{}` / method `{}`",
            instance.method_id,
            trace.method_id(),
            method.method_id
        )));
    }
    let alignment = align_span(trace, instance.char_span, method.char_len())?;
    aggregate(trace, &alignment, instance.smell_id(), statistic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalEstimate {
    pub smell_id: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub propense: bool,
    pub threshold: f64,
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {threshold} not in (0, 1)")))
    }
}

/// Mean, population standard deviation, and propensity flag (`mean >= threshold`)
/// over the scores of one smell type.
pub fn global_estimate(scores: &[PscScore], threshold: f64) -> Result<GlobalEstimate> {
    check_threshold(threshold)?;
    let first = scores
        .first()
        .ok_or_else(|| Error::InvalidArgument("no scores to estimate from".into()))?;
    if let Some(other) = scores.iter().find(|s| s.smell_id != first.smell_id) {
        return Err(Error::InvalidArgument(format!(
            "mixed smell types {} and {}",
            first.smell_id, other.smell_id
        )));
    }
    let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
    let mean = summary::mean(&values).expect("non-empty");
    let std = summary::population_std(&values).expect("non-empty");
    Ok(GlobalEstimate {
        smell_id: first.smell_id.clone(),
        mean,
        std,
        n: values.len(),
        propense: mean >= threshold,
        threshold,
    })
}
