//! Loading a prepared corpus: method files with analyzer reports beside them.

use std::collections::{BTreeMap, HashMap};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{
    parse_pylint_report, LineIndex, MethodRecord, ReportDiagnostics, SmellInstance, SmellTaxonomy,
};
use crate::error::{Error, Result};
use crate::trace::TraceSet;

#[derive(Debug, Clone, Default, Serialize)]
pub struct CorpusDiagnostics {
    pub methods: usize,
    pub empty_methods: Vec<String>,
    pub missing_reports: Vec<String>,
    pub unresolved: Vec<String>,
    #[serde(skip)]
    pub reports: ReportDiagnostics,
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub methods: Vec<MethodRecord>,
    pub instances: Vec<SmellInstance>,
    pub diagnostics: CorpusDiagnostics,
}

fn collect_python_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_python_files(&path, out)?;
        } else if path.extension().is_some_and(|ext| ext == "py") {
            out.push(path);
        }
    }
    Ok(())
}

/// Reads every `*.py` file under `dir` as one method. The method id is the
/// path relative to `dir` without the extension, with `/` separators.
///
/// Reports that fail to parse are hard errors; locations that do not
/// resolve against the method text are skipped and listed in diagnostics.
pub fn load_corpus(dir: &Path, taxonomy: &SmellTaxonomy) -> Result<Corpus> {
    let mut files = Vec::new();
    collect_python_files(dir, &mut files)?;
    files.sort();

    let mut corpus = Corpus::default();
    for file in files {
        let rel = file.strip_prefix(dir).expect("walked from dir");
        let origin = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let method_id = origin.strip_suffix(".py").unwrap_or(&origin).to_string();
        let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        if text.is_empty() {
            corpus.diagnostics.empty_methods.push(method_id);
            continue;
        }
        let report_path = file.with_extension("json");
        let report = match std::fs::read_to_string(&report_path) {
            Ok(report) => report,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                corpus.diagnostics.missing_reports.push(method_id);
                continue;
            }
            Err(e) => return Err(Error::io(report_path, e)),
        };
        let parsed = parse_pylint_report(&report, taxonomy, &method_id).map_err(|e| match e {
            Error::Parse { offset, message } => Error::Parse {
                offset,
                message: format!("{}: {message}", report_path.display()),
            },
            other => other,
        })?;
        corpus.diagnostics.reports.merge(&parsed.diagnostics);

        let lines = LineIndex::new(&text);
        for smell in &parsed.smells {
            match smell.resolve(&lines) {
                Ok(instance) => corpus.instances.push(instance),
                Err(e) => corpus.diagnostics.unresolved.push(format!("{method_id}: {e}")),
            }
        }
        corpus.methods.push(MethodRecord::new(method_id, origin, text)?);
        corpus.diagnostics.methods += 1;
    }
    Ok(corpus)
}

/// Token counts per method, from a JSON object `{method_id: count}` or from
/// a trace file (counting non-synthetic tokens).
pub fn load_token_counts(path: &Path) -> Result<HashMap<String, usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(map) = serde_json::from_str::<BTreeMap<String, usize>>(&text) {
        return Ok(map.into_iter().collect());
    }
    let traces = TraceSet::read_jsonl(BufReader::new(text.as_bytes()))?;
    Ok(traces
        .traces
        .iter()
        .map(|(id, trace)| (id.clone(), trace.real_token_count()))
        .collect())
}
