//! Report bundle and its rendered forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psc::{GlobalEstimate, Statistic};
use crate::stats::{BootstrapConfig, BootstrapDistribution, ComparisonResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    /// Sorted by descending mean, ties by smell id.
    pub estimates: Vec<GlobalEstimate>,
    pub ranking: Vec<String>,
    pub propense: usize,
    /// Per-instance scores by smell id.
    pub scores: BTreeMap<String, Vec<f64>>,
    pub exclusions: usize,
}

impl ModelSummary {
    pub fn estimate(&self, smell_id: &str) -> Option<&GlobalEstimate> {
        self.estimates.iter().find(|e| e.smell_id == smell_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub manifest_digest: String,
    pub statistic: Statistic,
    pub threshold: f64,
    pub bootstrap: BootstrapConfig,
    pub rng: String,
    pub smell_names: BTreeMap<String, String>,
    /// Model A then model B.
    pub models: Vec<ModelSummary>,
    /// Ordered by model A's ranking.
    pub comparisons: Vec<ComparisonResult>,
    pub distributions: Vec<BootstrapDistribution>,
    /// Smell types left out of the comparison, with the reason.
    pub omitted: BTreeMap<String, String>,
}

impl ReportBundle {
    pub fn load(text: &str) -> Result<Self> {
        let bundle: ReportBundle = serde_json::from_str(text).map_err(|e| Error::from_json(text, &e))?;
        bundle.check()?;
        Ok(bundle)
    }

    /// Every model ranks exactly the compared smells and estimates each of them.
    pub fn check(&self) -> Result<()> {
        if self.models.len() != 2 {
            return Err(Error::Invariant(format!("bundle holds {} models, expected 2", self.models.len())));
        }
        let compared: BTreeSet<&str> = self.comparisons.iter().map(|c| c.smell_id.as_str()).collect();
        for model in &self.models {
            let ranked: BTreeSet<&str> = model.ranking.iter().map(String::as_str).collect();
            if ranked != compared || model.ranking.len() != compared.len() {
                return Err(Error::Invariant(format!(
                    "ranking of `{}` is not a permutation of the compared smells",
                    model.model_id
                )));
            }
            if let Some(missing) = compared.iter().find(|s| model.estimate(s).is_none()) {
                return Err(Error::Invariant(format!("`{}` has no estimate for {missing}", model.model_id)));
            }
        }
        Ok(())
    }

    fn comparison(&self, smell_id: &str) -> Option<&ComparisonResult> {
        self.comparisons.iter().find(|c| c.smell_id == smell_id)
    }
}

/// `mean ± std` rounded to two decimals.
pub fn format_estimate(mean: f64, std: f64) -> String {
    format!("{mean:.2} ± {std:.2}")
}

/// Half-width of an interval in percentage points.
pub fn format_margin(margin: f64) -> String {
    format!("{:.1}%", margin * 100.0)
}

/// Headline line, e.g. `M1: 10 of 13 propense (PSC ≥ 0.50)`.
pub fn propense_line(model: &ModelSummary, threshold: f64) -> String {
    format!(
        "{}: {} of {} propense (PSC ≥ {threshold:.2})",
        model.model_id,
        model.propense,
        model.estimates.len()
    )
}

fn psc_cell(estimate: &GlobalEstimate) -> String {
    let cell = format_estimate(estimate.mean, estimate.std);
    if estimate.propense {
        cell
    } else {
        format!("{cell} ▽")
    }
}

fn table_row(bundle: &ReportBundle, smell: &str, rank: Option<usize>) -> String {
    let (a, b) = (&bundle.models[0], &bundle.models[1]);
    let ea = a.estimate(smell).expect("checked bundle");
    let eb = b.estimate(smell).expect("checked bundle");
    let cmp = bundle.comparison(smell).expect("checked bundle");
    let name = bundle.smell_names.get(smell).map(String::as_str).unwrap_or("");
    let mut row = String::from("|");
    if let Some(rank) = rank {
        let _ = write!(row, " {rank} |");
    }
    let _ = write!(
        row,
        " {smell} | {name} | {} | {} | {} / {} |",
        psc_cell(ea),
        psc_cell(eb),
        format_margin(cmp.ci_a.margin_of_error),
        format_margin(cmp.ci_b.margin_of_error),
    );
    if rank.is_some() {
        let _ = write!(row, " {:+.3} | {:.2} |", cmp.mean_delta, cmp.overlap);
    }
    row
}

pub fn render_markdown(bundle: &ReportBundle) -> String {
    let (a, b) = (&bundle.models[0], &bundle.models[1]);
    let level = (bundle.bootstrap.level * 100.0).round();
    let mut out = String::new();
    let _ = writeln!(out, "# Code smell propensity\n");
    let _ = writeln!(
        out,
        "Statistic: {}. Threshold λ = {:.2}. Intervals: {level}% bootstrap percentile, {} resamples, seed {} ({}).\n",
        bundle.statistic, bundle.threshold, bundle.bootstrap.resamples, bundle.bootstrap.seed, bundle.rng
    );
    let _ = writeln!(out, "- {}", propense_line(a, bundle.threshold));
    let _ = writeln!(out, "- {}\n", propense_line(b, bundle.threshold));
    let _ = writeln!(out, "PSC cells are mean ± std over instances; ▽ marks a mean below λ.\n");

    let header = format!("| Code Smell | Name | {} PSC | {} PSC | ME - {level}% |", a.model_id, b.model_id);
    let rule = "|---|---|---|---|---|";
    let n = a.ranking.len();
    let _ = writeln!(out, "## Top-5 highest and Top-3 lowest (ranked by {})\n", a.model_id);
    let _ = writeln!(out, "{header}\n{rule}");
    let top: Vec<usize> = if n <= 8 { (0..n).collect() } else { (0..5).chain(n - 3..n).collect() };
    for i in top {
        let _ = writeln!(out, "{}", table_row(bundle, &a.ranking[i], None));
    }

    let _ = writeln!(out, "\n## All smells\n");
    let _ = writeln!(
        out,
        "| Rank | Code Smell | Name | {} PSC | {} PSC | ME - {level}% | Δ mean | OVL |\n|---|---|---|---|---|---|---|---|",
        a.model_id, b.model_id
    );
    for (i, smell) in a.ranking.iter().enumerate() {
        let _ = writeln!(out, "{}", table_row(bundle, smell, Some(i + 1)));
    }

    if !bundle.omitted.is_empty() || a.exclusions + b.exclusions > 0 {
        let _ = writeln!(out, "\n## Diagnostics\n");
        for (model, count) in [(a, a.exclusions), (b, b.exclusions)] {
            if count > 0 {
                let _ = writeln!(out, "- {}: {count} instance(s) excluded as unscorable", model.model_id);
            }
        }
        for (smell, reason) in &bundle.omitted {
            let _ = writeln!(out, "- {smell} omitted: {reason}");
        }
    }
    out
}

fn csv_string(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    rows(&mut writer).map_err(|e| Error::Invariant(format!("csv: {e}")))?;
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Invariant(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Rows `smell_id, model_id, resample_mean`; the first data row carries the
/// propensity threshold under smell id `threshold`.
pub fn boxplot_csv(bundle: &ReportBundle) -> Result<String> {
    csv_string(|w| {
        w.write_record(["smell_id", "model_id", "resample_mean"])?;
        w.write_record(["threshold", "", &bundle.threshold.to_string()])?;
        for dist in &bundle.distributions {
            for m in &dist.resample_means {
                w.write_record([dist.smell_id.as_str(), dist.model_id.as_str(), &m.to_string()])?;
            }
        }
        Ok(())
    })
}

/// Raw per-instance scores, `smell_id, model_id, psc`.
pub fn scores_csv(bundle: &ReportBundle) -> Result<String> {
    csv_string(|w| {
        w.write_record(["smell_id", "model_id", "psc"])?;
        for model in &bundle.models {
            for (smell, values) in &model.scores {
                for v in values {
                    w.write_record([smell.as_str(), model.model_id.as_str(), &v.to_string()])?;
                }
            }
        }
        Ok(())
    })
}
