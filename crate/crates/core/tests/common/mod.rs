//! Fixture builders shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use smellprop::bench::RunConfig;
use smellprop::dataset::{MethodRecord, SmellTaxonomy};
use smellprop::span::CharSpan;
use smellprop::trace::{TokenRecord, TokenTrace, TraceHeader, TraceSet};

/// Text of one synthetic method; the smell sits on `result` in line 2.
pub fn method_text(tag: &str, i: usize) -> String {
    format!(
        "def f_{tag}_{i}(value, other):\n    result = value + {i}\n    if result > other:\n        return result\n    return other\n"
    )
}

/// Report JSON with one in-taxonomy message on `result` and one off-taxonomy message.
pub fn report_json(smell_id: &str, symbol: &str) -> String {
    format!(
        r#"[{{"type": "refactor", "module": "m", "obj": "f", "line": 2, "column": 4, "endLine": 2, "endColumn": 10, "path": "m.py", "symbol": "{symbol}", "message": "msg", "message-id": "{smell_id}"}},
{{"type": "convention", "module": "m", "obj": "f", "line": 1, "column": 0, "endLine": 1, "endColumn": 5, "path": "m.py", "symbol": "missing-function-docstring", "message": "msg", "message-id": "C0116"}}]"#
    )
}

/// Writes `<dir>/<smell>/<i>.py` and its report for each (smell, count).
pub fn write_corpus(dir: &Path, counts: &[(&str, usize)]) {
    let taxonomy = SmellTaxonomy::builtin();
    for (smell, n) in counts {
        let name = &taxonomy.get(smell).expect("builtin smell").name;
        let sub = dir.join(smell);
        std::fs::create_dir_all(&sub).unwrap();
        for i in 0..*n {
            std::fs::write(sub.join(format!("{i:04}.py")), method_text(smell, i)).unwrap();
            std::fs::write(sub.join(format!("{i:04}.json")), report_json(smell, name)).unwrap();
        }
    }
}

/// Toy tokenizer: non-whitespace runs cut into pieces of at most `width` characters.
pub fn chunk_spans(text: &str, width: usize) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        if chars[k].is_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        while k < chars.len() && !chars[k].is_whitespace() && k - start < width {
            k += 1;
        }
        spans.push(CharSpan::new(start, k));
    }
    spans
}

/// Trace with a leading begin-of-sequence marker; `prob(k, span)` gives the
/// probability of real token `k`.
pub fn make_trace(
    method: &MethodRecord,
    model_id: &str,
    vocab_size: u32,
    spans: &[CharSpan],
    mut prob: impl FnMut(usize, CharSpan) -> f64,
) -> TokenTrace {
    let mut tokens = vec![TokenRecord {
        index: 0,
        token_id: 1,
        span: CharSpan::new(0, 0),
        prob: None,
        logprob: None,
    }];
    for (k, &span) in spans.iter().enumerate() {
        let p = prob(k, span);
        tokens.push(TokenRecord {
            index: k + 1,
            token_id: (k as u32 * 7 + 3) % vocab_size,
            span,
            prob: Some(p),
            logprob: Some(p.ln()),
        });
    }
    TokenTrace {
        header: TraceHeader {
            method_id: method.method_id.clone(),
            model_id: model_id.to_string(),
            vocab_size,
            tokenizer_fingerprint: "toy-chunk".into(),
            token_count: tokens.len(),
            bos_present: true,
        },
        tokens,
    }
}

pub fn write_traces(path: &Path, traces: Vec<TokenTrace>) {
    let mut set = TraceSet::default();
    for t in traces {
        set.insert(t).unwrap();
    }
    let mut buf = Vec::new();
    set.write_jsonl(&mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

/// Reads a corpus directory back as method records, for tracing it.
pub fn corpus_methods(dir: &Path) -> Vec<MethodRecord> {
    smellprop::bench::load_corpus(dir, &SmellTaxonomy::builtin())
        .unwrap()
        .methods
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Config with every artifact path under this workspace.
    pub fn config(&self, models: &[&str]) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.paths.corpus = Some(self.path("corpus"));
        cfg.paths.manifest = Some(self.path("manifest.jsonl"));
        cfg.paths.output_dir = Some(self.path("out"));
        cfg.paths.traces = models
            .iter()
            .map(|m| (m.to_string(), self.path(&format!("trace-{m}.jsonl"))))
            .collect::<BTreeMap<_, _>>();
        cfg.paths.scores = models
            .iter()
            .map(|m| (m.to_string(), self.path(&format!("scores-{m}.jsonl"))))
            .collect::<BTreeMap<_, _>>();
        cfg.models = models.iter().map(|m| m.to_string()).collect();
        cfg
    }
}
