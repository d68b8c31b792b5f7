use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smellprop::bench::{cmd_compare, cmd_curate, cmd_report, cmd_score, propense_line, ReportBundle, RunConfig};
use smellprop::dataset::validation_sample_size;
use smellprop::psc::Statistic;
use smellprop::Error;

#[derive(Parser)]
#[command(name = "smellprop", version, about = "Code smell propensity benchmark")]
struct Cli {
    /// Run configuration (TOML, or JSON with a .json extension)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampling and bootstrap
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_statistic)]
    statistic: Option<Statistic>,
    /// Propensity threshold
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Number of bootstrap resamples
    #[arg(long = "bootstrap-b", global = true)]
    bootstrap_b: Option<usize>,
    /// Confidence level of the bootstrap intervals
    #[arg(long, global = true)]
    level: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dataset manifest from a prepared corpus
    Curate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        token_counts: Option<PathBuf>,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_tokens: Option<usize>,
        #[arg(long)]
        sample_per_smell: Option<usize>,
        #[arg(long)]
        min_instances: Option<usize>,
    },
    /// Score manifest instances against one model's trace
    Score {
        #[arg(long)]
        model: String,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two models' score files and render the report
    Compare {
        #[arg(long, requires = "b")]
        a: Option<String>,
        #[arg(long, requires = "a")]
        b: Option<String>,
        #[arg(long = "a-scores")]
        a_scores: Option<PathBuf>,
        #[arg(long = "b-scores")]
        b_scores: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-render a report from a saved bundle
    Report {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Instances to label by hand for a given confidence and margin
    SampleSize {
        #[arg(long)]
        population: u64,
        #[arg(long, default_value_t = 0.80)]
        confidence: f64,
        #[arg(long, default_value_t = 0.15)]
        margin: f64,
    },
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(statistic) = cli.statistic {
        config.statistic = statistic;
    }
    if let Some(threshold) = cli.threshold {
        config.threshold = threshold;
    }
    if let Some(b) = cli.bootstrap_b {
        config.bootstrap.resamples = b;
    }
    if let Some(level) = cli.level {
        config.bootstrap.level = level;
    }

    match cli.command {
        Command::Curate {
            corpus,
            token_counts,
            taxonomy,
            out,
            max_tokens,
            sample_per_smell,
            min_instances,
        } => {
            config.paths.corpus = corpus.or(config.paths.corpus);
            config.paths.token_counts = token_counts.or(config.paths.token_counts);
            config.paths.manifest = out.or(config.paths.manifest);
            config.taxonomy = taxonomy.or(config.taxonomy);
            if let Some(n) = max_tokens {
                config.curation.max_tokens = n;
            }
            if let Some(n) = sample_per_smell {
                config.curation.sample_per_smell = n;
            }
            if let Some(n) = min_instances {
                config.curation.min_instances = n;
            }
            let outcome = cmd_curate(&config)?;
            let c = &outcome.curation;
            eprintln!(
                "methods: {}, missing reports: {}, unresolved locations: {}, off-taxonomy messages: {}",
                outcome.corpus.methods,
                outcome.corpus.missing_reports.len(),
                outcome.corpus.unresolved.len(),
                outcome.corpus.reports.skipped_total(),
            );
            eprintln!(
                "degraded locations: {} (dropped {}), duplicates removed: {}, over token budget: {}",
                outcome.corpus.reports.degraded, c.degraded_dropped, c.duplicates_removed, c.over_budget
            );
            for (id, (available, kept)) in &c.retained {
                eprintln!("  {id}: kept {kept} of {available}");
            }
            for (id, available) in &c.dropped_types {
                eprintln!("  {id}: dropped ({available} < {})", config.curation.min_instances);
            }
            println!("{} {}", outcome.digest, outcome.manifest_path.display());
        }
        Command::Score {
            model,
            manifest,
            trace,
            out,
        } => {
            config.paths.manifest = manifest.or(config.paths.manifest);
            if let Some(trace) = trace {
                config.paths.traces.insert(model.clone(), trace);
            }
            if let Some(out) = out {
                config.paths.scores.insert(model.clone(), out);
            }
            let outcome = cmd_score(&config, &model)?;
            for e in &outcome.scores.exclusions {
                eprintln!("excluded {} {} {}: {}", e.smell_id, e.method_id, e.char_span, e.excluded);
            }
            for smell in &outcome.omitted {
                eprintln!("omitted {smell}: no scorable instances");
            }
            for e in &outcome.scores.estimates {
                eprintln!(
                    "  {} n={} {:.4} ± {:.4}{}",
                    e.smell_id,
                    e.n,
                    e.mean,
                    e.std,
                    if e.propense { " propense" } else { "" }
                );
            }
            println!("{}", outcome.score_path.display());
        }
        Command::Compare {
            a,
            b,
            a_scores,
            b_scores,
            out_dir,
        } => {
            if let (Some(a), Some(b)) = (a, b) {
                if let Some(path) = a_scores {
                    config.paths.scores.insert(a.clone(), path);
                }
                if let Some(path) = b_scores {
                    config.paths.scores.insert(b.clone(), path);
                }
                config.models = vec![a, b];
            }
            config.paths.output_dir = out_dir.or(config.paths.output_dir);
            let bundle = cmd_compare(&config)?;
            for model in &bundle.models {
                println!("{}", propense_line(model, bundle.threshold));
            }
        }
        Command::Report { bundle, out_dir } => {
            let text = std::fs::read_to_string(&bundle).map_err(|e| Error::Io {
                path: bundle.clone(),
                source: e,
            })?;
            let parsed = ReportBundle::load(&text)?;
            let out_dir = out_dir
                .or(config.paths.output_dir)
                .or_else(|| bundle.parent().map(PathBuf::from))
                .unwrap_or_default();
            print!("{}", cmd_report(&parsed, &out_dir)?);
        }
        Command::SampleSize {
            population,
            confidence,
            margin,
        } => {
            println!("{}", validation_sample_size(population, confidence, margin)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
