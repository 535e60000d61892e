//! JSON wire formats shared by detection reports, correction reports and
//! benchmark datasets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correct::CorrectionOutcome;
use crate::semantic::SemanticFinding;
use crate::taxonomy::{impact_to_score, Category, Impact, Registry};
use crate::violation::{AffectedElement, DetectedViolation, PageContext, SupplementaryInfo};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schemaVersion {found:?} (expected {SCHEMA_VERSION:?})")]
    SchemaVersion { found: String },
    #[error("entry {id:?} (line {line}): unknown violation name {name:?}")]
    UnknownViolation { id: String, name: String, line: usize },
    #[error("entry {id:?} (line {line}): {reason}")]
    InvalidEntry { id: String, line: usize, reason: String },
}

/// One violation as serialized in every file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationRecord {
    pub id: String,
    pub category: Category,
    pub violation_name: String,
    pub html_elements: Vec<String>,
    pub description: String,
    pub impact: Impact,
    pub violation_score: u32,
    #[serde(default)]
    pub context: PageContext,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supplementary: Option<SupplementaryInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix_advice: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_references: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<CorrectionOutcome>,
}

impl From<&DetectedViolation> for ViolationRecord {
    fn from(v: &DetectedViolation) -> Self {
        Self {
            id: v.id.clone(),
            category: v.category,
            violation_name: v.type_name.clone(),
            html_elements: v.html_elements(),
            description: v.description.clone(),
            impact: v.impact,
            violation_score: v.score,
            context: v.context.clone(),
            supplementary: v.supplementary.clone(),
            fix_advice: v.fix_advice.clone(),
            approximate: v.approximate,
            screenshot: v.screenshot.clone(),
            human_references: None,
            correction: None,
        }
    }
}

impl ViolationRecord {
    /// Rebuilds the violation, checking it against the taxonomy. `line` is
    /// only used in error messages.
    pub fn to_violation(&self, registry: &Registry, line: usize) -> Result<DetectedViolation, ReportError> {
        let invalid = |reason: String| ReportError::InvalidEntry { id: self.id.clone(), line, reason };
        let spec = registry.lookup(&self.violation_name).map_err(|_| ReportError::UnknownViolation {
            id: self.id.clone(),
            name: self.violation_name.clone(),
            line,
        })?;
        if self.html_elements.iter().all(|h| h.trim().is_empty()) {
            return Err(invalid("htmlElements is empty".into()));
        }
        if self.violation_score != impact_to_score(self.impact) {
            return Err(invalid(format!(
                "violationScore {} does not match impact {}",
                self.violation_score, self.impact
            )));
        }
        if self.category != spec.category {
            return Err(invalid(format!("category {} does not match the taxonomy ({})", self.category, spec.category)));
        }
        let affected = self.html_elements.iter().map(AffectedElement::detached).collect();
        let mut v = DetectedViolation::from_spec(self.id.clone(), spec, affected, self.context.clone());
        v.description = self.description.clone();
        v.impact = self.impact;
        v.score = self.violation_score;
        v.supplementary = self.supplementary.clone();
        v.fix_advice = self.fix_advice.clone();
        v.approximate = self.approximate;
        v.screenshot = self.screenshot.clone();
        Ok(v)
    }
}

/// Output of `detect`, and with corrections filled in, of `correct`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetectionReport {
    pub schema_version: String,
    #[serde(default)]
    pub context: PageContext,
    /// The scanned document, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub entries: Vec<ViolationRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discarded: Vec<SemanticFinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DetectionReport {
    pub fn new(context: PageContext, violations: &[DetectedViolation]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            context,
            source: None,
            entries: violations.iter().map(ViolationRecord::from).collect(),
            discarded: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn total_score(&self) -> u32 {
        self.entries.iter().map(|e| e.violation_score).sum()
    }

    pub fn outcomes(&self) -> Vec<CorrectionOutcome> {
        self.entries.iter().filter_map(|e| e.correction.clone()).collect()
    }
}

/// A benchmark corpus of violations with optional human references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchmarkDataset {
    pub schema_version: String,
    #[serde(default)]
    pub provenance: String,
    pub entries: Vec<ViolationRecord>,
}

/// Line of the entry with the given id in the source text, 0 if not found.
fn entry_line(text: &str, id: &str) -> usize {
    let Ok(quoted) = serde_json::to_string(id) else { return 0 };
    let mut search = 0;
    while let Some(off) = text[search..].find(&quoted) {
        let at = search + off;
        let before = text[..at].trim_end();
        if before.ends_with(':') && before[..before.len() - 1].trim_end().ends_with("\"id\"") {
            return text[..at].matches('\n').count() + 1;
        }
        search = at + quoted.len();
    }
    0
}

fn check_version(found: &str) -> Result<(), ReportError> {
    let major = |s: &str| s.split('.').next().map(str::to_string);
    if major(found) == major(SCHEMA_VERSION) {
        Ok(())
    } else {
        Err(ReportError::SchemaVersion { found: found.to_string() })
    }
}

/// Violations of all entries, validated against the taxonomy.
pub fn records_to_violations(
    records: &[ViolationRecord],
    registry: &Registry,
    source_text: &str,
) -> Result<Vec<DetectedViolation>, ReportError> {
    records.iter().map(|r| r.to_violation(registry, entry_line(source_text, &r.id))).collect()
}

fn read(path: &Path) -> Result<String, ReportError> {
    std::fs::read_to_string(path).map_err(|source| ReportError::Read { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path, pretty: bool) -> Result<(), ReportError> {
    let text = to_json(value, pretty)?;
    std::fs::write(path, text).map_err(|source| ReportError::Write { path: path.to_path_buf(), source })
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> Result<String, ReportError> {
    let mut text = if pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    text.push('\n');
    Ok(text)
}

/// Parses a dataset and validates every entry.
pub fn parse_dataset(text: &str, registry: &Registry) -> Result<BenchmarkDataset, ReportError> {
    let ds: BenchmarkDataset = serde_json::from_str(text)?;
    check_version(&ds.schema_version)?;
    records_to_violations(&ds.entries, registry, text)?;
    for e in &ds.entries {
        if e.human_references.as_ref().is_some_and(|r| r.iter().any(|s| s.trim().is_empty())) {
            return Err(ReportError::InvalidEntry {
                id: e.id.clone(),
                line: entry_line(text, &e.id),
                reason: "blank human reference".into(),
            });
        }
    }
    Ok(ds)
}

/// Points relative screenshot paths that do not exist from the working
/// directory at `dir`, the directory of the file the records came from.
pub fn resolve_screenshots(records: &mut [ViolationRecord], dir: &Path) {
    for e in records {
        if let Some(s) = &e.screenshot {
            let p = Path::new(s);
            if p.is_relative() && !p.exists() && dir.join(p).exists() {
                e.screenshot = Some(dir.join(p).to_string_lossy().into_owned());
            }
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, registry: &Registry) -> Result<BenchmarkDataset, ReportError> {
    let path = path.as_ref();
    let mut ds = parse_dataset(&read(path)?, registry)?;
    resolve_screenshots(&mut ds.entries, path.parent().unwrap_or(Path::new("")));
    Ok(ds)
}

pub fn parse_detection_report(text: &str, registry: &Registry) -> Result<DetectionReport, ReportError> {
    let r: DetectionReport = serde_json::from_str(text)?;
    check_version(&r.schema_version)?;
    records_to_violations(&r.entries, registry, text)?;
    Ok(r)
}

pub fn load_detection_report(path: impl AsRef<Path>, registry: &Registry) -> Result<DetectionReport, ReportError> {
    let path = path.as_ref();
    let mut r = parse_detection_report(&read(path)?, registry)?;
    resolve_screenshots(&mut r.entries, path.parent().unwrap_or(Path::new("")));
    Ok(r)
}
