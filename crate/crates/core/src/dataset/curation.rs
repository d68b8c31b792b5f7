//! Dataset curation: uniqueness across smell types, token budget, and
//! per-smell sampling.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use super::taxonomy::SmellTaxonomy;
use super::{MethodRecord, SmellInstance};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    /// Largest method size in model tokens, inclusive. 0 disables the budget.
    pub max_tokens: usize,
    pub sample_per_smell: usize,
    /// Smell types with fewer instances are dropped.
    pub min_instances: usize,
    pub seed: u64,
    /// Discard instances whose end position had to be guessed.
    pub drop_degraded: bool,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            max_tokens: 400,
            sample_per_smell: 100,
            min_instances: 100,
            seed: 42,
            drop_degraded: false,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_per_smell == 0 || self.min_instances == 0 {
            return Err(Error::Config(
                "sample_per_smell and min_instances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CurationDiagnostics {
    pub degraded_dropped: usize,
    pub duplicates_removed: usize,
    pub over_budget: usize,
    /// Smell types below `min_instances`, with their available count.
    pub dropped_types: BTreeMap<String, usize>,
    /// (available, kept) per retained smell type.
    pub retained: BTreeMap<String, (usize, usize)>,
}

/// Keeps each method (and each distinct method text) under a single smell type.
///
/// Methods sharing a content hash form one group. The group keeps the smell
/// type with the smallest global instance count (ties: smaller id), and only
/// the lexicographically first method carrying that type. All instances of
/// that type in that method survive.
pub fn deduplicate_methods(
    instances: Vec<SmellInstance>,
    methods: &[MethodRecord],
) -> Vec<SmellInstance> {
    let mut global_count: HashMap<&str, usize> = HashMap::new();
    for inst in &instances {
        *global_count.entry(inst.smell_id()).or_default() += 1;
    }
    let hash_of: HashMap<&str, &str> = methods
        .iter()
        .map(|m| (m.method_id.as_str(), m.content_hash.as_str()))
        .collect();
    let group_of = |inst: &SmellInstance| -> String {
        hash_of
            .get(inst.method_id.as_str())
            .map(|h| h.to_string())
            .unwrap_or_else(|| format!("id:{}", inst.method_id))
    };

    // group -> (rarity key of winning smell, method_id)
    let mut winners: HashMap<String, ((usize, String), String)> = HashMap::new();
    for inst in &instances {
        let candidate = (
            (global_count[inst.smell_id()], inst.smell.id.clone()),
            inst.method_id.clone(),
        );
        winners
            .entry(group_of(inst))
            .and_modify(|best| {
                if candidate < *best {
                    *best = candidate.clone();
                }
            })
            .or_insert(candidate);
    }

    instances
        .into_iter()
        .filter(|inst| {
            let ((_, smell), method) = &winners[&group_of(inst)];
            *smell == inst.smell.id && *method == inst.method_id
        })
        .collect()
}

/// Keeps instances whose method fits in `max_tokens` (inclusive); 0 means no limit.
pub fn filter_by_token_budget(
    instances: Vec<SmellInstance>,
    token_counts: &HashMap<String, usize>,
    max_tokens: usize,
) -> Result<Vec<SmellInstance>> {
    if max_tokens == 0 {
        return Ok(instances);
    }
    let mut kept = Vec::with_capacity(instances.len());
    for inst in instances {
        let count = *token_counts
            .get(&inst.method_id)
            .ok_or_else(|| Error::MissingTokenCount(inst.method_id.clone()))?;
        if count <= max_tokens {
            kept.push(inst);
        }
    }
    Ok(kept)
}

/// Drops under-represented smell types and samples a fixed number of
/// instances from each remaining type.
///
/// Each type draws from its own generator seeded by (seed, smell id), so the
/// selection for one type does not depend on the others. Selected instances
/// keep their input order.
pub fn sample_per_smell(
    taxonomy: &SmellTaxonomy,
    instances: Vec<SmellInstance>,
    methods: &[MethodRecord],
    config: &CurationConfig,
) -> Result<(DatasetManifest, CurationDiagnostics)> {
    config.validate()?;
    let mut by_smell: BTreeMap<usize, Vec<SmellInstance>> = BTreeMap::new();
    for inst in instances {
        let position = taxonomy.position(inst.smell_id()).ok_or_else(|| {
            Error::Invariant(format!("smell `{}` is not in the taxonomy", inst.smell.id))
        })?;
        by_smell.entry(position).or_default().push(inst);
    }

    let mut diagnostics = CurationDiagnostics::default();
    let mut selected = Vec::new();
    for (_, group) in by_smell {
        let smell_id = group[0].smell.id.clone();
        let available = group.len();
        if available < config.min_instances {
            diagnostics.dropped_types.insert(smell_id, available);
            continue;
        }
        let take = config.sample_per_smell.min(available);
        if take == available {
            selected.extend(group);
        } else {
            let mut rng = seeded(derive_seed(config.seed, &["sample", &smell_id]));
            let mut picks = index::sample(&mut rng, available, take).into_vec();
            picks.sort_unstable();
            let mut group: Vec<Option<SmellInstance>> = group.into_iter().map(Some).collect();
            selected.extend(picks.into_iter().map(|i| group[i].take().expect("distinct indices")));
        }
        diagnostics.retained.insert(smell_id, (available, take));
    }

    let manifest = DatasetManifest::from_parts(taxonomy.clone(), config.clone(), selected, methods)?;
    Ok((manifest, diagnostics))
}

/// Full curation pass: optional degraded filter, dedup, token budget, sampling.
pub fn curate(
    taxonomy: &SmellTaxonomy,
    instances: Vec<SmellInstance>,
    methods: &[MethodRecord],
    token_counts: &HashMap<String, usize>,
    config: &CurationConfig,
) -> Result<(DatasetManifest, CurationDiagnostics)> {
    config.validate()?;
    let before = instances.len();
    let instances: Vec<_> = if config.drop_degraded {
        instances.into_iter().filter(|i| !i.degraded).collect()
    } else {
        instances
    };
    let degraded_dropped = before - instances.len();

    let before = instances.len();
    let instances = deduplicate_methods(instances, methods);
    let duplicates_removed = before - instances.len();

    let before = instances.len();
    let instances = filter_by_token_budget(instances, token_counts, config.max_tokens)?;
    let over_budget = before - instances.len();

    let (manifest, mut diagnostics) = sample_per_smell(taxonomy, instances, methods, config)?;
    diagnostics.degraded_dropped = degraded_dropped;
    diagnostics.duplicates_removed = duplicates_removed;
    diagnostics.over_budget = over_budget;
    Ok((manifest, diagnostics))
}
