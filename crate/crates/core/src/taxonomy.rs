//! Registry of violation types, loaded from a JSON data file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The registry shipped with the crate.
pub const BUNDLED_TAXONOMY: &str = include_str!("../data/taxonomy.json");

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("taxonomy file {path} could not be read: {source}")]
    MissingFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("taxonomy schema violation: {0}")]
    Schema(String),
    #[error("duplicate violation type {0:?}")]
    DuplicateName(String),
    #[error("unknown violation type {0:?}")]
    UnknownName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Syntactic,
    Semantic,
    Layout,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Syntactic, Category::Semantic, Category::Layout];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Syntactic => "syntactic",
            Category::Semantic => "semantic",
            Category::Layout => "layout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "syntactic" | "syntax" => Some(Category::Syntactic),
            "semantic" => Some(Category::Semantic),
            "layout" => Some(Category::Layout),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Qualitative impact, ordered from least to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Impact {
    Cosmetic,
    Minor,
    Moderate,
    Serious,
    Critical,
}

impl Impact {
    pub const ALL: [Impact; 5] = [
        Impact::Cosmetic,
        Impact::Minor,
        Impact::Moderate,
        Impact::Serious,
        Impact::Critical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Impact::Cosmetic => "cosmetic",
            Impact::Minor => "minor",
            Impact::Moderate => "moderate",
            Impact::Serious => "serious",
            Impact::Critical => "critical",
        }
    }

    /// Capitalized form used in prompts and reports ("Critical").
    pub fn label(self) -> &'static str {
        match self {
            Impact::Cosmetic => "Cosmetic",
            Impact::Minor => "Minor",
            Impact::Moderate => "Moderate",
            Impact::Serious => "Serious",
            Impact::Critical => "Critical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Impact::ALL
            .into_iter()
            .find(|i| i.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Impact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric violation score: cosmetic 1 through critical 5.
pub fn impact_to_score(impact: Impact) -> u32 {
    match impact {
        Impact::Cosmetic => 1,
        Impact::Minor => 2,
        Impact::Moderate => 3,
        Impact::Serious => 4,
        Impact::Critical => 5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Supplementary {
    None,
    Image,
    Video,
    Screenshot,
    Colors,
    DocumentStructure,
}

impl Supplementary {
    /// Types whose detection or repair needs to see the rendered content.
    pub fn is_visual(self) -> bool {
        matches!(
            self,
            Supplementary::Image | Supplementary::Video | Supplementary::Screenshot
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationTypeSpec {
    pub name: String,
    pub category: Category,
    pub description: String,
    #[serde(rename = "wcag")]
    pub wcag_refs: Vec<String>,
    pub impact: Impact,
    pub supplementary: Supplementary,
}

impl ViolationTypeSpec {
    pub fn score(&self) -> u32 {
        impact_to_score(self.impact)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, ViolationTypeSpec>,
}

impl Registry {
    pub fn from_specs(specs: Vec<ViolationTypeSpec>) -> Result<Self, TaxonomyError> {
        let mut entries = BTreeMap::new();
        for spec in specs {
            let key = spec.name.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(TaxonomyError::Schema("entry with an empty name".into()));
            }
            if entries.contains_key(&key) {
                return Err(TaxonomyError::DuplicateName(spec.name));
            }
            entries.insert(key, spec);
        }
        Ok(Self { entries })
    }

    pub fn from_json_str(text: &str) -> Result<Self, TaxonomyError> {
        let specs: Vec<ViolationTypeSpec> =
            serde_json::from_str(text).map_err(|e| TaxonomyError::Schema(e.to_string()))?;
        Self::from_specs(specs)
    }

    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_TAXONOMY).expect("bundled taxonomy is valid")
    }

    /// Case-insensitive lookup by violation name.
    pub fn lookup(&self, name: &str) -> Result<&ViolationTypeSpec, TaxonomyError> {
        self.entries
            .get(&name.trim().to_ascii_lowercase())
            .ok_or_else(|| TaxonomyError::UnknownName(name.to_string()))
    }

    /// Entries sorted by name, optionally restricted to one category.
    pub fn list_types(&self, category: Option<Category>) -> Vec<&ViolationTypeSpec> {
        self.entries
            .values()
            .filter(|s| category.is_none_or(|c| s.category == c))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Registry, TaxonomyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::MissingFile {
        path: path.display().to_string(),
        source,
    })?;
    Registry::from_json_str(&text)
}

pub fn lookup<'r>(registry: &'r Registry, name: &str) -> Result<&'r ViolationTypeSpec, TaxonomyError> {
    registry.lookup(name)
}

pub fn list_types(registry: &Registry, category: Option<Category>) -> Vec<&ViolationTypeSpec> {
    registry.list_types(category)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_scale_is_one_to_five() {
        let scores: Vec<u32> = Impact::ALL.iter().map(|i| impact_to_score(*i)).collect();
        assert_eq!(scores, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn rejects_empty_and_duplicate_files() {
        assert!(matches!(Registry::from_json_str(""), Err(TaxonomyError::Schema(_))));
        let row = r#"{"name":"tabindex","category":"syntactic","description":"d","wcag":["WCAG 2.1.1"],"impact":"serious","supplementary":"none"}"#;
        let two = format!("[{row},{row}]");
        assert!(matches!(
            Registry::from_json_str(&two),
            Err(TaxonomyError::DuplicateName(n)) if n == "tabindex"
        ));
    }

    #[test]
    fn rejects_unknown_keys() {
        let row = r#"[{"name":"x","category":"layout","description":"d","wcag":[],"impact":"minor","supplementary":"none","extra":1}]"#;
        assert!(matches!(Registry::from_json_str(row), Err(TaxonomyError::Schema(_))));
    }

    #[test]
    fn bundled_lookups() {
        let r = Registry::bundled();
        let s = r.lookup("image-alt-not-descriptive").unwrap();
        assert_eq!(s.category, Category::Semantic);
        assert_eq!(s.impact, Impact::Critical);
        assert_eq!(s.wcag_refs, vec!["WCAG 1.1.1"]);
        assert_eq!(s.supplementary, Supplementary::Image);
        let s = r.lookup("meta-viewport").unwrap();
        assert_eq!((s.category, s.impact), (Category::Layout, Impact::Critical));
        assert!(matches!(r.lookup("nonexistent-rule"), Err(TaxonomyError::UnknownName(_))));
    }
}
