use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{must_exist, required, RunConfig};
use super::corpus::{load_corpus, load_token_counts, CorpusDiagnostics};
use super::report::{self, ModelSummary, ReportBundle};
use crate::dataset::{curate, content_hash, CurationDiagnostics, DatasetManifest};
use crate::error::{Error, Result};
use crate::psc::{global_estimate, score_instance, PscScore};
use crate::rng::RNG_ALGORITHM;
use crate::scores::{Exclusion, ScoreFile, ScoreHeader, SCORE_SCHEMA_VERSION};
use crate::stats::compare_models;
use crate::trace::TraceSet;

/// Writes `contents` beside `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
pub struct CurateOutcome {
    pub manifest_path: PathBuf,
    pub digest: String,
    pub corpus: CorpusDiagnostics,
    pub curation: CurationDiagnostics,
    #[serde(skip)]
    pub manifest: DatasetManifest,
}

/// Builds the dataset manifest from the configured corpus.
pub fn cmd_curate(config: &RunConfig) -> Result<CurateOutcome> {
    config.validate()?;
    let corpus_dir = required(&config.paths.corpus, "paths.corpus")?;
    let manifest_path = required(&config.paths.manifest, "paths.manifest")?;
    must_exist(corpus_dir)?;
    let taxonomy = config.taxonomy()?;

    let token_counts = if config.curation.max_tokens > 0 {
        let path = required(&config.paths.token_counts, "paths.token_counts (or set max_tokens = 0)")?;
        must_exist(path)?;
        load_token_counts(path)?
    } else {
        HashMap::new()
    };

    let corpus = load_corpus(corpus_dir, &taxonomy)?;
    let (manifest, curation) = curate(
        &taxonomy,
        corpus.instances,
        &corpus.methods,
        &token_counts,
        &config.curation,
    )?;
    if manifest.instances.is_empty() {
        let reason = if curation.dropped_types.is_empty() {
            "no in-taxonomy smell instances survived curation".to_string()
        } else {
            format!(
                "every smell type has fewer than {} instances ({})",
                config.curation.min_instances,
                curation
                    .dropped_types
                    .iter()
                    .map(|(id, n)| format!("{id}: {n}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        return Err(Error::EmptyDataset(reason));
    }
    let text = manifest.to_jsonl();
    write_atomic(manifest_path, text.as_bytes())?;
    Ok(CurateOutcome {
        manifest_path: manifest_path.to_path_buf(),
        digest: content_hash(&text),
        corpus: corpus.diagnostics,
        curation,
        manifest,
    })
}

#[derive(Debug)]
pub struct ScoreOutcome {
    pub score_path: PathBuf,
    pub scores: ScoreFile,
    /// Smell types with no scorable instance left.
    pub omitted: Vec<String>,
}

/// Scores every manifest instance against one model's trace file.
pub fn cmd_score(config: &RunConfig, model_id: &str) -> Result<ScoreOutcome> {
    config.validate()?;
    let manifest_path = required(&config.paths.manifest, "paths.manifest")?;
    let trace_path = config
        .paths
        .traces
        .get(model_id)
        .ok_or_else(|| Error::Config(format!("no trace file configured for model `{model_id}`")))?;
    let score_path = config
        .paths
        .scores
        .get(model_id)
        .ok_or_else(|| Error::Config(format!("no score file configured for model `{model_id}`")))?;
    must_exist(manifest_path)?;
    must_exist(trace_path)?;

    let manifest_text = read(manifest_path)?;
    let manifest = DatasetManifest::from_jsonl(&manifest_text)?;
    let file = File::open(trace_path).map_err(|e| Error::io(trace_path, e))?;
    let traces = TraceSet::read_jsonl(BufReader::new(file))?;
    if let Some(traced) = &traces.model_id {
        if traced != model_id {
            return Err(Error::Trace {
                method_id: "*".into(),
                reason: format!("trace file is for model `{traced}`, expected `{model_id}`"),
            });
        }
    }

    let missing: Vec<String> = manifest
        .methods
        .iter()
        .filter(|m| traces.get(&m.method_id).is_none())
        .map(|m| m.method_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTraces(missing));
    }

    let results: Vec<Result<PscScore>> = manifest
        .instances
        .par_iter()
        .map(|inst| {
            let method = manifest.method(&inst.method_id).expect("validated manifest");
            let trace = traces.get(&inst.method_id).expect("checked above");
            score_instance(trace, method, inst, config.statistic)
        })
        .collect();

    let mut scores = Vec::new();
    let mut exclusions = Vec::new();
    for (inst, result) in manifest.instances.iter().zip(results) {
        match result {
            Ok(score) => scores.push(score),
            Err(e @ (Error::Alignment { .. } | Error::UnscorableSpan { .. } | Error::InvalidArgument(_))) => {
                exclusions.push(Exclusion {
                    method_id: inst.method_id.clone(),
                    smell_id: inst.smell.id.clone(),
                    char_span: inst.char_span,
                    excluded: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }

    let mut by_smell: BTreeMap<&str, Vec<PscScore>> = BTreeMap::new();
    for s in &scores {
        by_smell.entry(s.smell_id.as_str()).or_default().push(s.clone());
    }
    let mut estimates = Vec::new();
    let mut omitted = Vec::new();
    for smell in manifest.count_by_smell().keys() {
        match by_smell.get_mut(smell.as_str()) {
            Some(group) => {
                group.sort_by(|a, b| (&a.method_id, a.char_span).cmp(&(&b.method_id, b.char_span)));
                estimates.push(global_estimate(group, config.threshold)?);
            }
            None => omitted.push(smell.clone()),
        }
    }

    let mut file = ScoreFile {
        header: ScoreHeader {
            schema_version: SCORE_SCHEMA_VERSION,
            model_id: model_id.to_string(),
            manifest_digest: content_hash(&manifest_text),
            taxonomy: manifest.taxonomy.entries().iter().map(|s| s.id.clone()).collect(),
            statistic: config.statistic,
            threshold: config.threshold,
        },
        scores,
        exclusions,
        estimates,
    };
    file.normalize();
    if file.scores.len() + file.exclusions.len() != manifest.instances.len() {
        return Err(Error::Invariant("scored and excluded instances do not add up to the manifest".into()));
    }
    write_atomic(score_path, file.to_jsonl().as_bytes())?;
    Ok(ScoreOutcome {
        score_path: score_path.clone(),
        scores: file,
        omitted,
    })
}

fn load_scores(path: &Path) -> Result<ScoreFile> {
    must_exist(path)?;
    let mut file = ScoreFile::from_jsonl(&read(path)?)?;
    file.normalize();
    Ok(file)
}

/// Compares the first two configured models and writes the comparison file,
/// the report bundle, and the rendered report into the output directory.
pub fn cmd_compare(config: &RunConfig) -> Result<ReportBundle> {
    config.validate()?;
    let [model_a, model_b] = match config.models.as_slice() {
        [a, b, ..] => [a, b],
        _ => return Err(Error::Config("compare needs two model ids in `models`".into())),
    };
    let score_path = |model: &str| {
        config
            .paths
            .scores
            .get(model)
            .ok_or_else(|| Error::Config(format!("no score file configured for model `{model}`")))
    };
    let out_dir = required(&config.paths.output_dir, "paths.output_dir")?;
    let file_a = load_scores(score_path(model_a)?)?;
    let file_b = load_scores(score_path(model_b)?)?;
    if file_a.header.manifest_digest != file_b.header.manifest_digest
        || file_a.header.taxonomy != file_b.header.taxonomy
    {
        return Err(Error::Manifest(format!(
            "score files were computed on different manifests ({} vs {})",
            file_a.header.manifest_digest, file_b.header.manifest_digest
        )));
    }

    let values_a = file_a.values_by_smell();
    let values_b = file_b.values_by_smell();
    let mut omitted = BTreeMap::new();
    let mut retained = Vec::new();
    for smell in &file_a.header.taxonomy {
        match (values_a.get(smell.as_str()), values_b.get(smell.as_str())) {
            (Some(_), Some(_)) => retained.push(smell.as_str()),
            (None, None) => {}
            (None, Some(_)) => {
                omitted.insert(smell.clone(), format!("no scored instances for {model_a}"));
            }
            (Some(_), None) => {
                omitted.insert(smell.clone(), format!("no scored instances for {model_b}"));
            }
        }
    }
    if retained.is_empty() {
        return Err(Error::EmptyDataset("no smell type is scored for both models".into()));
    }

    let compared: Vec<_> = retained
        .par_iter()
        .map(|&smell| {
            compare_models(
                smell,
                (model_a, &values_a[smell]),
                (model_b, &values_b[smell]),
                config.bootstrap,
            )
        })
        .collect::<Result<_>>()?;

    let summarize = |file: &ScoreFile, values: &BTreeMap<&str, Vec<f64>>| -> Result<ModelSummary> {
        let mut estimates = Vec::new();
        for &smell in &retained {
            let group: Vec<PscScore> = file.scores.iter().filter(|s| s.smell_id == smell).cloned().collect();
            estimates.push(global_estimate(&group, config.threshold)?);
        }
        estimates.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.smell_id.cmp(&b.smell_id)));
        Ok(ModelSummary {
            model_id: file.header.model_id.clone(),
            ranking: estimates.iter().map(|e| e.smell_id.clone()).collect(),
            propense: estimates.iter().filter(|e| e.propense).count(),
            estimates,
            scores: retained
                .iter()
                .map(|&s| (s.to_string(), values[s].clone()))
                .collect(),
            exclusions: file.exclusions.len(),
        })
    };
    let summary_a = summarize(&file_a, &values_a)?;
    let summary_b = summarize(&file_b, &values_b)?;

    let taxonomy = config.taxonomy().unwrap_or_else(|_| crate::dataset::SmellTaxonomy::builtin());
    let smell_names = retained
        .iter()
        .map(|&id| {
            let name = taxonomy.get(id).map(|s| s.name.clone()).unwrap_or_default();
            (id.to_string(), name)
        })
        .collect();

    let order: HashMap<&str, usize> = summary_a.ranking.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut compared = compared;
    compared.sort_by_key(|(r, _, _)| order[r.smell_id.as_str()]);
    let mut comparisons = Vec::new();
    let mut distributions = Vec::new();
    for (result, dist_a, dist_b) in compared {
        comparisons.push(result);
        distributions.push(dist_a);
        distributions.push(dist_b);
    }

    let bundle = ReportBundle {
        manifest_digest: file_a.header.manifest_digest.clone(),
        statistic: file_a.header.statistic,
        threshold: config.threshold,
        bootstrap: config.bootstrap,
        rng: RNG_ALGORITHM.to_string(),
        smell_names,
        models: vec![summary_a, summary_b],
        comparisons,
        distributions,
        omitted,
    };
    bundle.check()?;

    let mut comparison_lines = String::new();
    for c in &bundle.comparisons {
        comparison_lines.push_str(&serde_json::to_string(c).expect("comparison serializes"));
        comparison_lines.push('\n');
    }
    write_atomic(&out_dir.join("comparisons.jsonl"), comparison_lines.as_bytes())?;
    write_atomic(
        &out_dir.join("bundle.json"),
        serde_json::to_string_pretty(&bundle).expect("bundle serializes").as_bytes(),
    )?;
    cmd_report(&bundle, out_dir)?;
    Ok(bundle)
}

/// Renders `report.md`, `boxplot.csv`, and `scores.csv` from a bundle.
pub fn cmd_report(bundle: &ReportBundle, out_dir: &Path) -> Result<String> {
    bundle.check()?;
    let markdown = report::render_markdown(bundle);
    write_atomic(&out_dir.join("report.md"), markdown.as_bytes())?;
    write_atomic(&out_dir.join("boxplot.csv"), report::boxplot_csv(bundle)?.as_bytes())?;
    write_atomic(&out_dir.join("scores.csv"), report::scores_csv(bundle)?.as_bytes())?;
    Ok(markdown)
}
