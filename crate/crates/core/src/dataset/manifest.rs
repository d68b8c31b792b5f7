//! The curated dataset and its JSONL serialization.
//!
//! Line 1 is a header `{schema_version, taxonomy, curation_config, seed}`,
//! followed by one line per smell instance and then one line per method.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::curation::CurationConfig;
use super::location::{LineIndex, SourceLocation};
use super::taxonomy::SmellTaxonomy;
use super::{content_hash, MethodRecord, SmellInstance};
use crate::error::{Error, Result};
use crate::span::CharSpan;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub taxonomy: SmellTaxonomy,
    pub curation_config: CurationConfig,
    pub seed: u64,
    pub instances: Vec<SmellInstance>,
    /// Sorted by `method_id`.
    pub methods: Vec<MethodRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: u32,
    taxonomy: SmellTaxonomy,
    curation_config: CurationConfig,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceLine {
    method_id: String,
    smell_id: String,
    location: SourceLocation,
    char_span: CharSpan,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    degraded: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BodyLine {
    Instance(InstanceLine),
    Method(MethodRecord),
}

impl DatasetManifest {
    /// Builds a manifest holding `instances` and exactly the methods they reference.
    pub fn from_parts(
        taxonomy: SmellTaxonomy,
        curation_config: CurationConfig,
        instances: Vec<SmellInstance>,
        methods: &[MethodRecord],
    ) -> Result<Self> {
        let referenced: HashSet<&str> = instances.iter().map(|i| i.method_id.as_str()).collect();
        let mut kept: Vec<MethodRecord> = methods
            .iter()
            .filter(|m| referenced.contains(m.method_id.as_str()))
            .cloned()
            .collect();
        kept.sort_by(|a, b| a.method_id.cmp(&b.method_id));
        let manifest = DatasetManifest {
            seed: curation_config.seed,
            taxonomy,
            curation_config,
            instances,
            methods: kept,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn method(&self, method_id: &str) -> Option<&MethodRecord> {
        self.methods
            .binary_search_by(|m| m.method_id.as_str().cmp(method_id))
            .ok()
            .map(|i| &self.methods[i])
    }

    pub fn count_by_smell(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for inst in &self.instances {
            *counts.entry(inst.smell.id.clone()).or_default() += 1;
        }
        counts
    }

    /// Checks references, hashes, span resolution, and that no method
    /// appears under two smell types.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for pair in self.methods.windows(2) {
            if pair[0].method_id >= pair[1].method_id {
                return Err(Error::Manifest(format!(
                    "methods not sorted or duplicated at `{}`",
                    pair[1].method_id
                )));
            }
        }
        for m in &self.methods {
            if m.source_text.is_empty() {
                return Err(Error::Manifest(format!("method `{}` is empty", m.method_id)));
            }
            if m.content_hash != content_hash(&m.source_text) {
                return Err(Error::Manifest(format!("content hash mismatch for `{}`", m.method_id)));
            }
            seen.insert(m.method_id.as_str());
        }

        let mut smell_of: HashMap<&str, &str> = HashMap::new();
        let mut lines: HashMap<&str, LineIndex> = HashMap::new();
        for inst in &self.instances {
            let method = self.method(&inst.method_id).ok_or_else(|| {
                Error::Manifest(format!("instance references unknown method `{}`", inst.method_id))
            })?;
            if self.taxonomy.get(&inst.smell.id) != Some(&inst.smell) {
                return Err(Error::Manifest(format!("smell `{}` not in taxonomy", inst.smell.id)));
            }
            if let Some(other) = smell_of.insert(&inst.method_id, &inst.smell.id) {
                if other != inst.smell.id {
                    return Err(Error::Manifest(format!(
                        "method `{}` appears under both {other} and {}",
                        inst.method_id, inst.smell.id
                    )));
                }
            }
            let index = lines
                .entry(&inst.method_id)
                .or_insert_with(|| LineIndex::new(&method.source_text));
            let resolved = index.resolve(inst.location)?;
            if resolved != inst.char_span {
                return Err(Error::Manifest(format!(
                    "char span {} of `{}` does not match location {} (resolves to {resolved})",
                    inst.char_span, inst.method_id, inst.location
                )));
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = Header {
            schema_version: MANIFEST_SCHEMA_VERSION,
            taxonomy: self.taxonomy.clone(),
            curation_config: self.curation_config.clone(),
            seed: self.seed,
        };
        push_line(&mut out, &header);
        for inst in &self.instances {
            push_line(
                &mut out,
                &InstanceLine {
                    method_id: inst.method_id.clone(),
                    smell_id: inst.smell.id.clone(),
                    location: inst.location,
                    char_span: inst.char_span,
                    degraded: inst.degraded,
                },
            );
        }
        for method in &self.methods {
            push_line(&mut out, method);
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut offset = 0;
        let mut lines = text.split_inclusive('\n').map(|line| {
            let start = offset;
            offset += line.len();
            (start, line)
        });
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?;
        let header: Header = parse_line(first, 0)?;
        if header.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported schema version {}",
                header.schema_version
            )));
        }

        let mut instances = Vec::new();
        let mut methods = Vec::new();
        for (start, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(line, start)? {
                BodyLine::Instance(l) => {
                    let smell = header.taxonomy.get(&l.smell_id).cloned().ok_or_else(|| {
                        Error::Manifest(format!("smell `{}` not in taxonomy", l.smell_id))
                    })?;
                    instances.push(SmellInstance {
                        method_id: l.method_id,
                        smell,
                        location: l.location,
                        char_span: l.char_span,
                        degraded: l.degraded,
                    });
                }
                BodyLine::Method(m) => methods.push(m),
            }
        }
        let manifest = DatasetManifest {
            taxonomy: header.taxonomy,
            curation_config: header.curation_config,
            seed: header.seed,
            instances,
            methods,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Hex SHA-256 of the serialized manifest.
    pub fn digest(&self) -> String {
        super::content_hash(&self.to_jsonl())
    }
}

fn push_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("manifest lines serialize"));
    out.push('\n');
}

fn parse_line<T: serde::de::DeserializeOwned>(line: &str, start: usize) -> Result<T> {
    serde_json::from_str(line).map_err(|e| match Error::from_json(line, &e) {
        Error::Parse { offset, message } => Error::Parse {
            offset: start + offset,
            message,
        },
        other => other,
    })
}
