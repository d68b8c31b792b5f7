//! Bootstrap distributions of per-smell scores and two-model comparisons.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::summary;

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Equal-width histogram bins over [0, 1] used by [`overlap_coefficient`].
pub const OVERLAP_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub smell_id: String,
    pub model_id: String,
    pub resample_means: Vec<f64>,
    pub resamples: usize,
    pub resample_size: usize,
    pub seed: u64,
}

/// Draws `resamples` resamples with replacement of `resample_size` values
/// (default: all of them) and records each resample's mean.
pub fn bootstrap_means(
    values: &[f64],
    resamples: usize,
    resample_size: Option<usize>,
    seed: u64,
) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot bootstrap an empty sample".into()));
    }
    if resamples == 0 {
        return Err(Error::InvalidArgument("resample count must be at least 1".into()));
    }
    let size = resample_size.unwrap_or(values.len());
    if size == 0 {
        return Err(Error::InvalidArgument("resample size must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut draw = vec![0.0; size];
    Ok((0..resamples)
        .map(|_| {
            for slot in draw.iter_mut() {
                *slot = values[rng.gen_range(0..values.len())];
            }
            summary::mean(&draw).expect("non-empty")
        })
        .collect())
}

impl BootstrapDistribution {
    pub fn new(
        smell_id: &str,
        model_id: &str,
        values: &[f64],
        resamples: usize,
        resample_size: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        let resample_means = bootstrap_means(values, resamples, resample_size, seed)?;
        Ok(BootstrapDistribution {
            smell_id: smell_id.to_string(),
            model_id: model_id.to_string(),
            resample_means,
            resamples,
            resample_size: resample_size.unwrap_or(values.len()),
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub level: f64,
    pub low: f64,
    pub high: f64,
    pub margin_of_error: f64,
}

pub fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("confidence level {level} not in (0, 1)")))
    }
}

/// Percentile interval of the resample means, interpolating linearly between
/// order statistics.
pub fn percentile_ci(dist: &BootstrapDistribution, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let mut sorted = dist.resample_means.clone();
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("empty bootstrap distribution".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let low = summary::quantile_sorted(&sorted, tail).expect("valid quantile");
    let high = summary::quantile_sorted(&sorted, 1.0 - tail).expect("valid quantile");
    Ok(IntervalEstimate {
        level,
        low,
        high,
        margin_of_error: (high - low) / 2.0,
    })
}

fn histogram(values: &[f64]) -> [u64; OVERLAP_BINS] {
    let mut bins = [0u64; OVERLAP_BINS];
    for &v in values {
        let idx = (v.clamp(0.0, 1.0) * OVERLAP_BINS as f64).floor() as usize;
        bins[idx.min(OVERLAP_BINS - 1)] += 1;
    }
    bins
}

/// Shared area of the two distributions' relative-frequency histograms
/// over [`OVERLAP_BINS`] equal bins of [0, 1].
///
/// Computed in integer arithmetic up to a single final division, so it is
/// exactly symmetric and exactly 1 for identical histograms.
pub fn overlap_coefficient(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("overlap of an empty distribution".into()));
    }
    let (ha, hb) = (histogram(a), histogram(b));
    let (na, nb) = (a.len() as u128, b.len() as u128);
    let shared: u128 = ha
        .iter()
        .zip(&hb)
        .map(|(&ca, &cb)| (ca as u128 * nb).min(cb as u128 * na))
        .sum();
    Ok(shared as f64 / (na * nb) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub smell_id: String,
    pub model_a: String,
    pub model_b: String,
    pub ci_a: IntervalEstimate,
    pub ci_b: IntervalEstimate,
    pub overlap: f64,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
            seed: 42,
        }
    }
}

/// Seed shared by both models' bootstraps of one smell type.
pub fn smell_seed(master: u64, smell_id: &str) -> u64 {
    derive_seed(master, &["bootstrap", smell_id])
}

/// Bootstraps both models' scores for one smell, with their percentile
/// intervals and the overlap of the resample-mean distributions.
pub fn compare_models(
    smell_id: &str,
    (model_a, scores_a): (&str, &[f64]),
    (model_b, scores_b): (&str, &[f64]),
    config: BootstrapConfig,
) -> Result<(ComparisonResult, BootstrapDistribution, BootstrapDistribution)> {
    check_level(config.level)?;
    let seed = smell_seed(config.seed, smell_id);
    let dist_a = BootstrapDistribution::new(smell_id, model_a, scores_a, config.resamples, None, seed)?;
    let dist_b = BootstrapDistribution::new(smell_id, model_b, scores_b, config.resamples, None, seed)?;
    let mean_a = summary::mean(scores_a).expect("non-empty");
    let mean_b = summary::mean(scores_b).expect("non-empty");
    let result = ComparisonResult {
        smell_id: smell_id.to_string(),
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        ci_a: percentile_ci(&dist_a, config.level)?,
        ci_b: percentile_ci(&dist_b, config.level)?,
        overlap: overlap_coefficient(&dist_a.resample_means, &dist_b.resample_means)?,
        mean_delta: mean_a - mean_b,
    };
    Ok((result, dist_a, dist_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Box-Muller normal draws.
    fn normal_sample(rng: &mut impl Rng, mean: f64, std: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen();
                mean + std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    fn dist(values: Vec<f64>) -> BootstrapDistribution {
        BootstrapDistribution {
            smell_id: "X".into(),
            model_id: "m".into(),
            resamples: values.len(),
            resample_size: 1,
            seed: 0,
            resample_means: values,
        }
    }

    #[test]
    fn constant_data() {
        let d = BootstrapDistribution::new("C0103", "m", &[0.7; 50], 200, None, 3).unwrap();
        assert!(d.resample_means.iter().all(|&m| m == 0.7));
        let ci = percentile_ci(&d, 0.95).unwrap();
        assert_eq!((ci.low, ci.high, ci.margin_of_error), (0.7, 0.7, 0.0));
    }

    #[test]
    fn two_point_enumeration() {
        // Ordered draws of size 2 from {0, 1}: (0,0) (0,1) (1,0) (1,1).
        let exact = [0.25, 0.5, 0.25];
        let means = bootstrap_means(&[0.0, 1.0], 10_000, Some(2), 11).unwrap();
        for (k, want) in exact.iter().enumerate() {
            let target = k as f64 / 2.0;
            let freq = means.iter().filter(|&&m| m == target).count() as f64 / means.len() as f64;
            assert!((freq - want).abs() < 0.02, "P(mean={target}) = {freq}");
        }
        assert_eq!(means.iter().filter(|&&m| m != 0.0 && m != 0.5 && m != 1.0).count(), 0);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let values = [0.1, 0.4, 0.35, 0.8, 0.62];
        let a = bootstrap_means(&values, 500, None, 7).unwrap();
        let b = bootstrap_means(&values, 500, None, 7).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, bootstrap_means(&values, 500, None, 8).unwrap());
    }

    #[test]
    fn uniform_grid_interval() {
        let d = dist((0..=100).map(|i| i as f64 / 100.0).collect());
        let ci = percentile_ci(&d, 0.95).unwrap();
        assert!((ci.low - 0.025).abs() < 1e-12 && (ci.high - 0.975).abs() < 1e-12);
        assert!((ci.margin_of_error - 0.475).abs() < 1e-12);
    }

    #[test]
    fn level_bounds() {
        let d = dist(vec![0.5]);
        assert!(percentile_ci(&d, 0.0).is_err());
        assert!(percentile_ci(&d, 1.0).is_err());
    }

    #[test]
    fn overlap_cases() {
        let a = vec![0.1, 0.5, 0.5, 0.9];
        assert_eq!(overlap_coefficient(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap_coefficient(&[0.0, 0.1, 0.19], &[0.8, 0.9, 1.0]).unwrap(), 0.0);

        // Four points at the centre of each bin, bins 1..=25 vs 13..=37 (1-based).
        let centre = |bin: usize| (bin as f64 - 0.5) / OVERLAP_BINS as f64;
        let a: Vec<f64> = (1..=25).flat_map(|b| [centre(b); 4]).collect();
        let b: Vec<f64> = (13..=37).flat_map(|b| [centre(b); 4]).collect();
        assert!((overlap_coefficient(&a, &b).unwrap() - 13.0 / 25.0).abs() < 1e-9);
        assert!(overlap_coefficient(&[], &a).is_err());
    }

    #[test]
    fn compare_identical_sets() {
        let scores = [0.3, 0.5, 0.7, 0.9, 0.65];
        let (r, _, _) = compare_models("R1716", ("m1", &scores), ("m2", &scores), BootstrapConfig::default()).unwrap();
        assert_eq!(r.overlap, 1.0);
        assert_eq!(r.mean_delta, 0.0);
        assert_eq!(r.ci_a, r.ci_b);
    }

    #[test]
    fn compare_synthetic_moments() {
        let mut rng = seeded(99);
        let a = normal_sample(&mut rng, 0.80, 0.10, 100);
        let b = normal_sample(&mut rng, 0.77, 0.10, 100);
        let (r, _, _) = compare_models("R1716", ("M1", &a), ("M2", &b), BootstrapConfig::default()).unwrap();
        // Each sample mean has standard error 0.01, so the delta is 0.03 within ~3 SE.
        assert!((r.mean_delta - 0.03).abs() < 0.045, "delta {}", r.mean_delta);
        assert!(r.ci_a.low < r.ci_a.high && r.ci_a.margin_of_error < 0.05);
    }

    #[test]
    fn compare_singletons() {
        let (r, _, _) = compare_models("C2401", ("a", &[0.3]), ("b", &[0.6]), BootstrapConfig::default()).unwrap();
        assert_eq!((r.ci_a.low, r.ci_a.high), (0.3, 0.3));
        assert_eq!((r.ci_b.low, r.ci_b.high), (0.6, 0.6));
        assert_eq!(r.overlap, 0.0);
        assert!((r.mean_delta + 0.3).abs() < 1e-15);
    }

    #[test]
    fn interval_narrows_with_sample_size() {
        let mut rng = seeded(5);
        let width = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let values: Vec<f64> = normal_sample(rng, 0.6, 0.1, n).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let d = BootstrapDistribution::new("X", "m", &values, 500, None, 1).unwrap();
            percentile_ci(&d, 0.95).unwrap().margin_of_error
        };
        let avg = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| (0..20).map(|_| width(n, rng)).sum::<f64>() / 20.0;
        let (w25, w100, w400) = (avg(25, &mut rng), avg(100, &mut rng), avg(400, &mut rng));
        assert!(w25 > w100 && w100 > w400, "{w25} {w100} {w400}");
    }

    proptest! {
        #[test]
        fn resample_means_within_range(values in proptest::collection::vec(0.0f64..=1.0, 1..40), seed in any::<u64>()) {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let d = BootstrapDistribution::new("X", "m", &values, 100, None, seed).unwrap();
            prop_assert!(d.resample_means.iter().all(|&m| lo <= m && m <= hi));
            let ci = percentile_ci(&d, 0.95).unwrap();
            prop_assert!(lo <= ci.low && ci.low <= ci.high && ci.high <= hi);
        }

        #[test]
        fn overlap_symmetric_and_bounded(a in proptest::collection::vec(0.0f64..=1.0, 1..60), b in proptest::collection::vec(0.0f64..=1.0, 1..60)) {
            let ab = overlap_coefficient(&a, &b).unwrap();
            prop_assert_eq!(ab, overlap_coefficient(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab == 1.0, {
                let (ha, hb) = (histogram(&a), histogram(&b));
                ha.iter().zip(&hb).all(|(&x, &y)| x as u128 * b.len() as u128 == y as u128 * a.len() as u128)
            });
        }
    }
}
