//! Smell types and the taxonomy they are drawn from.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Convention,
    Refactor,
    Warning,
}

impl Category {
    /// Message-id prefix letter used by the analyzer for this category.
    pub fn letter(self) -> char {
        match self {
            Category::Convention => 'C',
            Category::Refactor => 'R',
            Category::Warning => 'W',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SmellType {
    pub id: String,
    pub name: String,
    pub category: Category,
}

impl SmellType {
    pub fn new(id: &str, name: &str, category: Category) -> Result<Self> {
        let smell = SmellType {
            id: id.to_string(),
            name: name.to_string(),
            category,
        };
        smell.validate()?;
        Ok(smell)
    }

    fn validate(&self) -> Result<()> {
        let mut chars = self.id.chars();
        let well_formed = chars.next() == Some(self.category.letter())
            && self.id.len() == 5
            && chars.all(|c| c.is_ascii_digit());
        if !well_formed {
            return Err(Error::Taxonomy(format!(
                "id `{}` must be `{}` followed by 4 digits for category {:?}",
                self.id,
                self.category.letter(),
                self.category
            )));
        }
        if self.name.is_empty() {
            return Err(Error::Taxonomy(format!("smell `{}` has an empty name", self.id)));
        }
        Ok(())
    }
}

impl fmt::Display for SmellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.name)
    }
}

/// Ordered, non-empty set of smell types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SmellTaxonomy {
    entries: Vec<SmellType>,
}

impl SmellTaxonomy {
    pub fn new(entries: Vec<SmellType>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Taxonomy("taxonomy is empty".into()));
        }
        let mut ids = HashSet::new();
        let mut names = HashSet::new();
        for entry in &entries {
            entry.validate()?;
            if !ids.insert(entry.id.as_str()) {
                return Err(Error::Taxonomy(format!("duplicate id `{}`", entry.id)));
            }
            if !names.insert(entry.name.as_str()) {
                return Err(Error::Taxonomy(format!("duplicate name `{}`", entry.name)));
            }
        }
        Ok(SmellTaxonomy { entries })
    }

    /// The thirteen method-level smells of the reference benchmark.
    pub fn builtin() -> Self {
        use Category::*;
        let table = [
            ("C0103", "invalid-name", Convention),
            ("C0121", "singleton-comparison", Convention),
            ("C3001", "unnecessary-lambda-assignment", Convention),
            ("C2401", "non-ascii-name", Convention),
            ("C0104", "disallowed-name", Convention),
            ("R0913", "too-many-arguments", Refactor),
            ("R1702", "too-many-nested-blocks", Refactor),
            ("R0916", "too-many-boolean-expressions", Refactor),
            ("R1701", "consider-merging-isinstance", Refactor),
            ("R1716", "chained-comparison", Refactor),
            ("W0718", "broad-exception-caught", Warning),
            ("W0719", "broad-exception-raised", Warning),
            ("W0108", "unnecessary-lambda", Warning),
        ];
        let entries = table
            .into_iter()
            .map(|(id, name, category)| SmellType {
                id: id.into(),
                name: name.into(),
                category,
            })
            .collect();
        SmellTaxonomy::new(entries).expect("builtin taxonomy is valid")
    }

    /// Loads a JSON array of `{id, name, category}` objects.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries: Vec<SmellType> =
            serde_json::from_str(&text).map_err(|e| Error::from_json(&text, &e))?;
        SmellTaxonomy::new(entries)
    }

    pub fn entries(&self) -> &[SmellType] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SmellType> {
        self.entries.iter().find(|s| s.id == id)
    }

    /// Looks a message up by message-id first, then by symbolic name.
    pub fn lookup(&self, message_id: Option<&str>, symbol: Option<&str>) -> Option<&SmellType> {
        message_id
            .and_then(|id| self.get(id))
            .or_else(|| symbol.and_then(|name| self.entries.iter().find(|s| s.name == name)))
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|s| s.id == id)
    }
}

impl<'de> Deserialize<'de> for SmellTaxonomy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<SmellType>::deserialize(deserializer)?;
        SmellTaxonomy::new(entries).map_err(serde::de::Error::custom)
    }
}
