//! Dataset-level metrics and benchmark runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correct::{correct_all, score::signature, CorrectionOutcome, Scorer, SemanticRecheck, Source, Strategy};
use crate::dom::parse_document;
use crate::llm::{cosine_similarity, Embedder, Gateway};
use crate::report::{records_to_violations, BenchmarkDataset, ReportError, SCHEMA_VERSION};
use crate::taxonomy::{Category, Registry};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot average an empty score list")]
    EmptyScores,
    #[error("improvement is undefined when the initial average score is {0}")]
    UndefinedImprovement(f64),
    #[error("entry has no human reference")]
    NoReferences,
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Mean violation score of a dataset.
pub fn average_violation_score(scores: &[u32]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    Ok(scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64)
}

/// Fractional decrease of the average score.
pub fn improvement(r_initial: f64, r_fix: f64) -> Result<f64, EvalError> {
    if r_initial.is_nan() || r_initial <= 0.0 {
        return Err(EvalError::UndefinedImprovement(r_initial));
    }
    Ok(1.0 - r_fix / r_initial)
}

/// Score an outcome contributes after correction.
pub fn reported_score(o: &CorrectionOutcome) -> u32 {
    if o.flags.not_fixed {
        o.scores.original
    } else {
        o.final_score
    }
}

pub fn corrected_count(outcomes: &[CorrectionOutcome]) -> usize {
    outcomes.iter().filter(|o| !o.flags.not_fixed && o.final_score == 0).count()
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Average of an entry's cosines against its references.
pub fn entry_similarity(cosines: &[f64]) -> Result<f64, EvalError> {
    mean(cosines).ok_or(EvalError::NoReferences)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityItem {
    pub type_name: String,
    pub candidate: String,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityRow {
    #[serde(rename = "type")]
    pub type_name: String,
    pub count: usize,
    pub avg_similarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityReport {
    pub rows: Vec<SimilarityRow>,
    pub overall_avg_similarity: Option<f64>,
    /// Entries left out because embedding failed or they had no reference.
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

fn similarity_of(item: &SimilarityItem, embedder: &dyn Embedder) -> Result<f64, String> {
    let c = embedder.embed(&item.candidate).map_err(|e| e.to_string())?;
    let cosines = item
        .references
        .iter()
        .map(|r| {
            let e = embedder.embed(r).map_err(|e| e.to_string())?;
            cosine_similarity(&c, &e).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    entry_similarity(&cosines).map_err(|e| e.to_string())
}

/// Per-type and overall mean of per-entry similarities.
pub fn similarity_report(items: &[SimilarityItem], embedder: &dyn Embedder) -> SimilarityReport {
    let mut by_type: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::new();
    let mut report = SimilarityReport::default();
    for item in items {
        match similarity_of(item, embedder) {
            Ok(s) => {
                by_type.entry(&item.type_name).or_default().push(s);
                all.push(s);
            }
            Err(e) => {
                report.excluded += 1;
                report.failures.push(format!("{}: {e}", item.type_name));
            }
        }
    }
    report.rows = by_type
        .into_iter()
        .map(|(t, v)| SimilarityRow { type_name: t.to_string(), count: v.len(), avg_similarity: mean(&v).unwrap_or_default() })
        .collect();
    report.overall_avg_similarity = mean(&all);
    report
}

/// The text a correction produced for the repaired property, e.g. the new
/// alt text of an image.
pub fn corrected_text(type_name: &str, html: &str) -> String {
    let sig = signature(type_name, html);
    let generic = sig.len() == 1 && sig[0] == crate::dom::normalize(html);
    if generic || sig.is_empty() {
        parse_document(html).root().text_content().split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        sig.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CategoryBreakdown {
    pub category: Category,
    pub count: usize,
    pub r_initial: f64,
    pub r_fix: f64,
    pub improvement_i: Option<f64>,
    pub corrected_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub schema_version: String,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
    #[serde(default)]
    pub provenance: String,
    pub n: usize,
    #[serde(rename = "R_initial")]
    pub r_initial: f64,
    #[serde(rename = "R_fix")]
    pub r_fix: f64,
    /// Absent when the initial average is zero.
    pub improvement_i: Option<f64>,
    pub corrected_count: usize,
    pub per_category: Vec<CategoryBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityReport>,
    pub llm_calls: u64,
    pub entries: Vec<CorrectionOutcome>,
}

fn aggregate(outcomes: &[&CorrectionOutcome]) -> (f64, f64, Option<f64>, usize) {
    let initial: Vec<u32> = outcomes.iter().map(|o| o.scores.original).collect();
    let fixed: Vec<u32> = outcomes.iter().map(|o| reported_score(o)).collect();
    let r_i = average_violation_score(&initial).unwrap_or(0.0);
    let r_f = average_violation_score(&fixed).unwrap_or(0.0);
    let owned: Vec<CorrectionOutcome> = outcomes.iter().map(|o| (*o).clone()).collect();
    (r_i, r_f, improvement(r_i, r_f).ok(), corrected_count(&owned))
}

impl EvaluationReport {
    /// Aggregates outcomes; `categories` is parallel to `outcomes`.
    pub fn from_outcomes(strategy: impl Into<String>, categories: &[Category], outcomes: Vec<CorrectionOutcome>) -> Self {
        let refs: Vec<&CorrectionOutcome> = outcomes.iter().collect();
        let (r_initial, r_fix, improvement_i, corrected) = aggregate(&refs);
        let per_category = Category::ALL
            .into_iter()
            .filter_map(|c| {
                let group: Vec<&CorrectionOutcome> =
                    outcomes.iter().zip(categories).filter(|(_, k)| **k == c).map(|(o, _)| o).collect();
                if group.is_empty() {
                    return None;
                }
                let (r_initial, r_fix, improvement_i, corrected_count) = aggregate(&group);
                Some(CategoryBreakdown { category: c, count: group.len(), r_initial, r_fix, improvement_i, corrected_count })
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            strategy: strategy.into(),
            provider: None,
            provenance: String::new(),
            n: outcomes.len(),
            r_initial,
            r_fix,
            improvement_i,
            corrected_count: corrected,
            per_category,
            similarity: None,
            llm_calls: 0,
            entries: outcomes,
        }
    }
}

#[derive(Default)]
pub struct BenchmarkOptions<'a> {
    pub embedder: Option<&'a dyn Embedder>,
    pub semantic: Option<&'a dyn SemanticRecheck>,
}

/// Corrects every dataset entry with `strategy` and aggregates the metrics.
pub fn run_benchmark(
    dataset: &BenchmarkDataset,
    strategy: Strategy,
    gateway: &Gateway,
    registry: &Registry,
    options: &BenchmarkOptions<'_>,
) -> Result<EvaluationReport, EvalError> {
    let violations = records_to_violations(&dataset.entries, registry, "")?;
    let mut scorer = Scorer::new(registry);
    if let Some(s) = options.semantic {
        scorer = scorer.with_semantic(s);
    }
    let before = gateway.calls();
    let outcomes = correct_all(strategy, &violations, registry, gateway, &scorer);
    let llm_calls = gateway.calls() - before;
    let categories: Vec<Category> = violations.iter().map(|v| v.category).collect();

    let similarity = options.embedder.map(|emb| {
        let items: Vec<SimilarityItem> = dataset
            .entries
            .iter()
            .zip(&outcomes)
            .filter_map(|(e, o)| {
                let refs = e.human_references.clone().filter(|r| !r.is_empty())?;
                let html = if o.source == Source::Original { o.affected_html.join("\n") } else { o.chosen_html.clone() };
                Some(SimilarityItem {
                    type_name: e.violation_name.clone(),
                    candidate: corrected_text(&e.violation_name, &html),
                    references: refs,
                })
            })
            .collect();
        similarity_report(&items, emb)
    });

    let mut report = EvaluationReport::from_outcomes(strategy.as_str(), &categories, outcomes);
    report.provider = Some(gateway.provider().name().to_string());
    report.provenance = dataset.provenance.clone();
    report.similarity = similarity;
    report.llm_calls = llm_calls;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correct::{Flags, Scores};
    use crate::llm::mock::HashEmbedder;

    fn outcome(original: u32, final_score: u32, not_fixed: bool) -> CorrectionOutcome {
        CorrectionOutcome {
            violation_id: "x".into(),
            affected_html: vec!["<p></p>".into()],
            chosen_html: "<p></p>".into(),
            source: if not_fixed { Source::Original } else { Source::Llm1 },
            scores: Scores { original, llm1: Some(final_score), llm2: None },
            flags: Flags { not_fixed, ..Flags::default() },
            confidence: None,
            explanation: None,
            error: None,
            final_score,
        }
    }

    #[test]
    fn averages_and_improvement() {
        assert_eq!(average_violation_score(&[5, 4, 3]).unwrap(), 4.0);
        assert_eq!(average_violation_score(&[0, 0]).unwrap(), 0.0);
        assert!(matches!(average_violation_score(&[]), Err(EvalError::EmptyScores)));
        assert_eq!(improvement(2.0, 0.32).unwrap(), 0.84);
        assert_eq!(improvement(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(improvement(3.0, 0.0).unwrap(), 1.0);
        assert!(matches!(improvement(0.0, 0.0), Err(EvalError::UndefinedImprovement(_))));
    }

    #[test]
    fn not_fixed_outcomes_count_at_their_original_score() {
        let outs = vec![outcome(5, 0, false), outcome(4, 0, true), outcome(3, 1, false)];
        assert_eq!(corrected_count(&outs), 1);
        let r = EvaluationReport::from_outcomes("t", &[Category::Syntactic, Category::Semantic, Category::Layout], outs);
        assert_eq!(r.r_initial, 4.0);
        assert!((r.r_fix - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.per_category.len(), 3);
    }

    #[test]
    fn sixteen_percent_residual_is_eighty_four_percent_improvement() {
        let outs = vec![outcome(5, 0, false), outcome(5, 0, false), outcome(5, 1, false), outcome(5, 3, false), outcome(5, 0, false)];
        let r = EvaluationReport::from_outcomes("t", &[Category::Syntactic; 5], outs);
        assert!((r.improvement_i.unwrap() - 0.84).abs() < 1e-12);
    }

    #[test]
    fn entry_similarity_is_the_mean_cosine() {
        let s = entry_similarity(&[0.5986, 0.8364, 0.6760]).unwrap();
        assert!((s - 0.7037).abs() < 1e-4);
    }

    #[test]
    fn identical_texts_are_fully_similar() {
        let e = HashEmbedder { dims: 512 };
        let items = vec![SimilarityItem {
            type_name: "image-alt-not-descriptive".into(),
            candidate: "A golden retriever playing with a ball".into(),
            references: vec!["A golden retriever playing with a ball".into()],
        }];
        let r = similarity_report(&items, &e);
        assert!((r.overall_avg_similarity.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(r.rows[0].count, 1);
    }

    #[test]
    fn corrected_text_picks_the_repaired_attribute() {
        assert_eq!(corrected_text("image-alt-not-descriptive", "<img src=a alt=\"A dog\">"), "A dog");
        assert_eq!(corrected_text("button-name", "<button> Go  now</button>"), "Go now");
    }
}
