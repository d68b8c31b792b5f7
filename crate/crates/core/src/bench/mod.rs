//! End-to-end commands: curate, score, compare, report.
//!
//! Every step reads and writes plain files, so tracing can run on a
//! different host than the analysis.

mod commands;
mod config;
mod corpus;
mod report;

pub use commands::{cmd_compare, cmd_curate, cmd_report, cmd_score, write_atomic, CurateOutcome, ScoreOutcome};
pub use config::{Paths, RunConfig};
pub use corpus::{load_corpus, load_token_counts, Corpus, CorpusDiagnostics};
pub use report::{
    boxplot_csv, format_estimate, format_margin, propense_line, render_markdown, scores_csv, ModelSummary,
    ReportBundle,
};
