mod common;

use std::process::Command;

use common::*;
use smellprop::bench::{cmd_compare, cmd_curate, cmd_report, cmd_score, ReportBundle, RunConfig};
use smellprop::dataset::{DatasetManifest, SmellTaxonomy};
use smellprop::scores::ScoreFile;
use smellprop::Error;

const SMELLS: [&str; 3] = ["R1716", "W0718", "C0104"];

/// Corpus of 3 smells x 30 methods, traced by two toy models whose
/// probabilities depend on the smell.
fn prepared(ws: &Workspace) -> RunConfig {
    let corpus = ws.path("corpus");
    write_corpus(&corpus, &SMELLS.map(|s| (s, 30)));
    let methods = corpus_methods(&corpus);
    for (model, base) in [("M1", 0.7), ("M2", 0.4)] {
        let traces = methods
            .iter()
            .map(|m| {
                let bump = if m.method_id.starts_with("C0104") { -0.3 } else { 0.0 };
                let jitter = (m.method_id.len() % 7) as f64 / 100.0;
                make_trace(m, model, 32016, &chunk_spans(&m.source_text, 4), |k, _| {
                    base + bump + jitter + (k % 3) as f64 / 50.0
                })
            })
            .collect();
        write_traces(&ws.path(&format!("trace-{model}.jsonl")), traces);
    }
    let mut cfg = ws.config(&["M1", "M2"]);
    cfg.paths.token_counts = Some(ws.path("trace-M1.jsonl"));
    cfg.curation.min_instances = 25;
    cfg.curation.sample_per_smell = 20;
    cfg.bootstrap.resamples = 300;
    cfg
}

#[test]
fn end_to_end() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    let curated = cmd_curate(&cfg).unwrap();
    assert_eq!(curated.manifest.instances.len(), 3 * 20);
    assert_eq!(curated.corpus.reports.skipped_total(), 90);

    let s1 = cmd_score(&cfg, "M1").unwrap();
    let s2 = cmd_score(&cfg, "M2").unwrap();
    assert_eq!(s1.scores.scores.len(), 60);
    assert!(s1.scores.exclusions.is_empty());
    assert_eq!(s1.scores.estimates.len(), 3);

    let bundle = cmd_compare(&cfg).unwrap();
    assert_eq!(bundle.models[0].ranking.len(), 3);
    assert_eq!(bundle.models[0].ranking.last().unwrap(), "C0104");
    assert!(bundle.comparisons.iter().all(|c| c.mean_delta > 0.2 && c.overlap == 0.0));
    let report = std::fs::read_to_string(ws.path("out/report.md")).unwrap();
    assert!(report.contains("M1: 2 of 3 propense"), "{report}");
    assert!(report.contains("M2: 0 of 3 propense"), "{report}");
    let boxplot = std::fs::read_to_string(ws.path("out/boxplot.csv")).unwrap();
    assert_eq!(boxplot.lines().count(), 2 + 3 * 2 * 300);

    // The bundle on disk re-renders to the same report.
    let saved = ReportBundle::load(&std::fs::read_to_string(ws.path("out/bundle.json")).unwrap()).unwrap();
    assert_eq!(saved, bundle);
    assert_eq!(cmd_report(&saved, &ws.path("again")).unwrap(), report);

    // Scored plus excluded instances account for the whole manifest.
    let manifest = DatasetManifest::from_jsonl(&std::fs::read_to_string(ws.path("manifest.jsonl")).unwrap()).unwrap();
    assert_eq!(s2.scores.scores.len() + s2.scores.exclusions.len(), manifest.instances.len());
}

#[test]
fn intermediates_rederive_identically() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    cmd_curate(&cfg).unwrap();
    cmd_score(&cfg, "M1").unwrap();
    cmd_score(&cfg, "M2").unwrap();
    cmd_compare(&cfg).unwrap();
    let snapshot = |names: &[&str]| -> Vec<Vec<u8>> { names.iter().map(|n| std::fs::read(ws.path(n)).unwrap()).collect() };
    let files = ["manifest.jsonl", "scores-M1.jsonl", "scores-M2.jsonl", "out/comparisons.jsonl", "out/bundle.json", "out/report.md"];
    let before = snapshot(&files);

    for f in ["manifest.jsonl", "scores-M1.jsonl", "scores-M2.jsonl"] {
        std::fs::remove_file(ws.path(f)).unwrap();
    }
    std::fs::remove_dir_all(ws.path("out")).unwrap();
    cmd_curate(&cfg).unwrap();
    cmd_score(&cfg, "M1").unwrap();
    cmd_score(&cfg, "M2").unwrap();
    cmd_compare(&cfg).unwrap();
    assert_eq!(snapshot(&files), before);
}

#[test]
fn rankings_ignore_score_row_order() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    cmd_curate(&cfg).unwrap();
    cmd_score(&cfg, "M1").unwrap();
    cmd_score(&cfg, "M2").unwrap();
    let baseline = cmd_compare(&cfg).unwrap();

    for model in ["M1", "M2"] {
        let path = ws.path(&format!("scores-{model}.jsonl"));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    }
    let shuffled = cmd_compare(&cfg).unwrap();
    assert_eq!(shuffled, baseline);
}

#[test]
fn missing_trace_lists_methods() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    cmd_curate(&cfg).unwrap();
    let manifest = DatasetManifest::from_jsonl(&std::fs::read_to_string(ws.path("manifest.jsonl")).unwrap()).unwrap();
    let keep: Vec<_> = manifest.methods.iter().skip(2).cloned().collect();
    let traces = keep
        .iter()
        .map(|m| make_trace(m, "M1", 100, &chunk_spans(&m.source_text, 4), |_, _| 0.5))
        .collect();
    write_traces(&ws.path("trace-M1.jsonl"), traces);
    match cmd_score(&cfg, "M1") {
        Err(Error::MissingTraces(ids)) => {
            assert_eq!(ids, [manifest.methods[0].method_id.clone(), manifest.methods[1].method_id.clone()]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unscorable_instances_are_excluded_not_fatal() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    cmd_curate(&cfg).unwrap();
    let manifest = DatasetManifest::from_jsonl(&std::fs::read_to_string(ws.path("manifest.jsonl")).unwrap()).unwrap();
    // Drop every token of the first method that touches line 2.
    let traces = manifest
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut spans = chunk_spans(&m.source_text, 4);
            if i == 0 {
                let line2 = m.source_text.find('\n').unwrap() + 1;
                let line3 = line2 + m.source_text[line2..].find('\n').unwrap();
                spans.retain(|s| s.end <= line2 || s.start >= line3);
            }
            make_trace(m, "M1", 100, &spans, |_, _| 0.5)
        })
        .collect();
    write_traces(&ws.path("trace-M1.jsonl"), traces);
    let out = cmd_score(&cfg, "M1").unwrap();
    assert_eq!(out.scores.exclusions.len(), 1);
    assert_eq!(out.scores.scores.len(), 59);
    assert!(out.scores.exclusions[0].excluded.contains("overlaps no token"));
    let n: usize = out.scores.estimates.iter().map(|e| e.n).sum();
    assert_eq!(n, 59);
}

#[test]
fn manifest_mismatch_is_rejected() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    cmd_curate(&cfg).unwrap();
    cmd_score(&cfg, "M1").unwrap();
    cmd_score(&cfg, "M2").unwrap();
    let path = ws.path("scores-M2.jsonl");
    let mut file = ScoreFile::from_jsonl(&std::fs::read_to_string(&path).unwrap()).unwrap();
    file.header.manifest_digest = "0000".into();
    std::fs::write(&path, file.to_jsonl()).unwrap();
    assert!(matches!(cmd_compare(&cfg), Err(Error::Manifest(_))));
}

#[test]
fn empty_dataset_is_an_error() {
    let ws = Workspace::new();
    write_corpus(&ws.path("corpus"), &[("R1716", 5), ("W0718", 7)]);
    let mut cfg = ws.config(&[]);
    cfg.curation.max_tokens = 0;
    match cmd_curate(&cfg) {
        Err(e @ Error::EmptyDataset(_)) => {
            assert_eq!(e.exit_code(), 2);
            assert!(e.to_string().contains("empty dataset"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(!ws.path("manifest.jsonl").exists());
}

fn smellprop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smellprop"))
}

#[test]
fn cli_round_trip_and_exit_codes() {
    let ws = Workspace::new();
    let cfg = prepared(&ws);
    let config_path = ws.path("run.toml");
    std::fs::write(&config_path, toml::to_string(&cfg).unwrap()).unwrap();

    let run = |args: &[&str]| smellprop().arg("--config").arg(&config_path).args(args).output().unwrap();
    let out = run(&["curate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("C0104: kept 20 of 30"));
    assert!(run(&["score", "--model", "M1"]).status.success());
    assert!(run(&["score", "--model", "M2"]).status.success());
    let out = run(&["--bootstrap-b", "100", "compare"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "M1: 2 of 3 propense (PSC ≥ 0.50)\nM2: 0 of 3 propense (PSC ≥ 0.50)\n");

    let out = smellprop()
        .args(["report", "--bundle"])
        .arg(ws.path("out/bundle.json"))
        .arg("--out-dir")
        .arg(ws.path("rendered"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("## Top-5 highest and Top-3 lowest"));

    assert_eq!(run(&["--threshold", "1.5", "compare"]).status.code(), Some(1));
    assert_eq!(run(&["score", "--model", "M3"]).status.code(), Some(1));
    assert_eq!(smellprop().arg("curate").arg("--nope").output().unwrap().status.code(), Some(1));

    std::fs::write(ws.path("trace-M2.jsonl"), "{not json}\n").unwrap();
    let out = run(&["score", "--model", "M2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte offset"));
}

#[test]
fn cli_sample_size() {
    let out = smellprop().args(["sample-size", "--population", "132"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), "17\n");
    let out = smellprop().args(["sample-size", "--population", "10", "--margin", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ten_of_thirteen_propense() {
    let ws = Workspace::new();
    let taxonomy = SmellTaxonomy::builtin();
    let counts: Vec<(&str, usize)> = taxonomy.entries().iter().map(|s| (s.id.as_str(), 20)).collect();
    write_corpus(&ws.path("corpus"), &counts);
    let low: Vec<&str> = taxonomy.entries()[10..].iter().map(|s| s.id.as_str()).collect();
    let methods = corpus_methods(&ws.path("corpus"));
    for (model, high) in [("M1", 0.72), ("M2", 0.45)] {
        let traces = methods
            .iter()
            .map(|m| {
                let p = if low.iter().any(|s| m.method_id.starts_with(s)) { 0.3 } else { high };
                make_trace(m, model, 32016, &chunk_spans(&m.source_text, 4), |k, _| p + (k % 2) as f64 / 100.0)
            })
            .collect();
        write_traces(&ws.path(&format!("trace-{model}.jsonl")), traces);
    }
    let mut cfg = ws.config(&["M1", "M2"]);
    cfg.paths.token_counts = Some(ws.path("trace-M1.jsonl"));
    cfg.curation.min_instances = 20;
    cfg.curation.sample_per_smell = 20;
    cfg.bootstrap.resamples = 200;
    cmd_curate(&cfg).unwrap();
    cmd_score(&cfg, "M1").unwrap();
    cmd_score(&cfg, "M2").unwrap();
    let bundle = cmd_compare(&cfg).unwrap();
    let report = std::fs::read_to_string(ws.path("out/report.md")).unwrap();
    assert!(report.contains("M1: 10 of 13 propense (PSC ≥ 0.50)"), "{report}");
    assert!(report.contains("M2: 0 of 13 propense (PSC ≥ 0.50)"), "{report}");
    let bottom: Vec<&str> = bundle.models[0].ranking[10..].iter().map(String::as_str).collect();
    let mut expected = low.clone();
    expected.sort();
    assert_eq!(bottom.iter().copied().collect::<std::collections::BTreeSet<_>>(), expected.into_iter().collect());
    // Legend, then the 8-row and 13-row tables: M1 marks its 3 low types, M2 every row.
    assert_eq!(report.matches("▽").count(), 1 + (3 + 8) + (3 + 13));
}
