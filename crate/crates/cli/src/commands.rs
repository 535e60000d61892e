use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use a11y_mend::correct::{apply_corrections, correct_all, CorrectionOutcome, Flags, Scorer, Scores, Source, Strategy};
use a11y_mend::detect::detect_static;
use a11y_mend::dom::parse_document;
use a11y_mend::eval::{run_benchmark, BenchmarkOptions, EvaluationReport};
use a11y_mend::fetch::fetch_html;
use a11y_mend::llm::mock::{HashEmbedder, MockProvider};
use a11y_mend::llm::openai::{OpenAiProvider, ProviderConfig};
use a11y_mend::llm::{Embedder, Gateway, LlmProvider, RetryPolicy};
use a11y_mend::report::{
    load_dataset, load_detection_report, parse_detection_report, records_to_violations, to_json, DetectionReport, SCHEMA_VERSION,
};
use a11y_mend::semantic::{detect_semantic_report, GatewayRecheck, ScreenshotRef, SemanticOptions};
use a11y_mend::taxonomy::{load_taxonomy, Category, Registry};
use a11y_mend::violation::PageContext;

use crate::{
    ApplyArgs, BenchmarkArgs, Cli, Command, CorrectArgs, DetectArgs, EmbedderArg, EvaluateArgs, FetchArgs, Global,
    ProviderKind, TaxonomyAction,
};

pub fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match cli.command {
        Command::Detect(a) => detect(g, a),
        Command::Correct(a) => correct(g, a),
        Command::Apply(a) => apply(g, a),
        Command::Evaluate(a) => evaluate(g, a),
        Command::Benchmark(a) => benchmark(g, a),
        Command::Taxonomy { action } => taxonomy(g, action),
        Command::Fetch(a) => fetch(g, a),
    }
}

fn registry(g: &Global) -> Result<Registry> {
    match &g.taxonomy {
        Some(p) => load_taxonomy(p).with_context(|| format!("loading taxonomy {}", p.display())),
        None => Ok(Registry::bundled()),
    }
}

fn provider_config(g: &Global) -> ProviderConfig {
    ProviderConfig {
        endpoint: g.endpoint.clone(),
        model: g.model.clone(),
        embedding_model: g.embedding_model.clone(),
        api_key_env: g.api_key_env.clone(),
        timeout_secs: g.timeout,
        max_parallel: g.parallel,
        max_retries: g.retries,
        ..ProviderConfig::default()
    }
}

fn uses_mock(g: &Global) -> bool {
    g.mock.is_some() || g.provider == ProviderKind::Mock
}

fn gateway(g: &Global) -> Result<Gateway> {
    let provider: Arc<dyn LlmProvider> = if uses_mock(g) {
        let Some(script) = &g.mock else { bail!("--provider mock needs --mock <script>") };
        Arc::new(MockProvider::load(script).with_context(|| format!("loading mock script {}", script.display()))?)
    } else {
        Arc::new(OpenAiProvider::from_config(provider_config(g))?)
    };
    Ok(Gateway::new(provider)
        .with_retry(RetryPolicy { max_retries: g.retries, ..RetryPolicy::default() })
        .with_max_parallel(g.parallel.max(1)))
}

/// File contents, or standard input for `-`.
fn read(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("cannot read standard input")?;
        return Ok(text);
    }
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(bytes: &[u8], output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn detect(g: &Global, a: DetectArgs) -> Result<u8> {
    let registry = registry(g)?;
    let html = read(&a.input)?;
    let mut doc = parse_document(&html);
    if !a.url.is_empty() {
        doc = doc.with_base_url(a.url.clone());
    }
    let ctx = PageContext::new(a.url.clone(), a.domain.clone());
    let mut violations = detect_static(&doc, &ctx, &registry);
    let mut warnings = Vec::new();
    let mut discarded = Vec::new();
    let semantic = a.semantic || a.screenshot.is_some();
    if semantic && a.no_screenshot {
        warnings.push("semantic detection skipped: no screenshot".to_string());
    } else if semantic {
        let Some(path) = &a.screenshot else {
            bail!("semantic detection needs --screenshot <png|jpeg>, or --no-screenshot to skip it");
        };
        let shot = ScreenshotRef::new(path)?.with_viewport_width(a.viewport_width);
        let gw = gateway(g)?;
        let opts = SemanticOptions { download_images: a.download_images, ..SemanticOptions::default() };
        let sem = detect_semantic_report(&doc, &shot, &ctx, &registry, &gw, &opts)?;
        violations.extend(sem.violations);
        discarded = sem.discarded;
        warnings.extend(sem.warnings);
    }
    let mut report = DetectionReport::new(ctx, &violations);
    report.source = Some(a.input.display().to_string());
    report.discarded = discarded;
    report.warnings = warnings;
    warn_all(&report.warnings);
    emit(to_json(&report, g.pretty)?.as_bytes(), a.output.as_deref())?;
    Ok(if report.entries.is_empty() { 0 } else { 1 })
}

fn correct(g: &Global, a: CorrectArgs) -> Result<u8> {
    let registry = registry(g)?;
    let mut report = load_detection_report(&a.report, &registry)?;
    let violations = records_to_violations(&report.entries, &registry, "")?;
    let gw = gateway(g)?;
    let recheck = GatewayRecheck { gateway: &gw, registry: &registry };
    let mut scorer = Scorer::new(&registry);
    if a.semantic_recheck {
        scorer = scorer.with_semantic(&recheck);
    }
    let outcomes = correct_all(a.strategy.into(), &violations, &registry, &gw, &scorer);
    for o in &outcomes {
        if let Some(e) = &o.error {
            eprintln!("warning: {}: {e}", o.violation_id);
        }
    }
    for (entry, o) in report.entries.iter_mut().zip(outcomes) {
        entry.correction = Some(o);
    }
    emit(to_json(&report, g.pretty)?.as_bytes(), a.output.as_deref())?;
    Ok(0)
}

fn apply(g: &Global, a: ApplyArgs) -> Result<u8> {
    let registry = registry(g)?;
    let doc = parse_document(&read(&a.input)?);
    let text = read(&a.corrections)?;
    // A corrections report, or a bare array of outcomes.
    let outcomes = match serde_json::from_str::<Vec<CorrectionOutcome>>(&text) {
        Ok(list) => list,
        Err(_) => {
            let report = parse_detection_report(&text, &registry)?;
            let outcomes = report.outcomes();
            if outcomes.len() < report.entries.len() {
                eprintln!("warning: {} entries carry no correction", report.entries.len() - outcomes.len());
            }
            outcomes
        }
    };
    let result = apply_corrections(&doc, &outcomes);
    warn_all(&result.warnings);
    emit(result.document.to_html().as_bytes(), a.output.as_deref())?;
    Ok(0)
}

fn evaluate(g: &Global, a: EvaluateArgs) -> Result<u8> {
    let registry = registry(g)?;
    let before = parse_detection_report(&read(&a.before)?, &registry)?;
    let after = parse_detection_report(&read(&a.after)?, &registry)?;
    let mut categories = Vec::new();
    let mut outcomes = Vec::new();
    for e in &before.entries {
        let done = after.entries.iter().find(|x| x.id == e.id).and_then(|x| x.correction.clone());
        let o = done.unwrap_or_else(|| CorrectionOutcome {
            violation_id: e.id.clone(),
            affected_html: e.html_elements.clone(),
            chosen_html: e.html_elements.join("\n"),
            source: Source::Original,
            scores: Scores { original: e.violation_score, llm1: None, llm2: None },
            flags: Flags { not_fixed: true, ..Flags::default() },
            confidence: None,
            explanation: None,
            error: None,
            final_score: e.violation_score,
        });
        categories.push(e.category);
        outcomes.push(o);
    }
    let report = EvaluationReport::from_outcomes("evaluate", &categories, outcomes);
    emit(to_json(&report, g.pretty)?.as_bytes(), a.output.as_deref())?;
    Ok(0)
}

fn benchmark(g: &Global, a: BenchmarkArgs) -> Result<u8> {
    let registry = registry(g)?;
    let dataset = load_dataset(&a.dataset, &registry)?;
    let strategies: Vec<Strategy> =
        if a.strategy.is_empty() { Strategy::ALL.to_vec() } else { a.strategy.iter().map(|&s| s.into()).collect() };
    let gw = gateway(g)?;
    let choice = a.embedder.unwrap_or(if uses_mock(g) { EmbedderArg::Hash } else { EmbedderArg::Provider });
    let hash = HashEmbedder { dims: 512 };
    let remote;
    let embedder: Option<&dyn Embedder> = match choice {
        EmbedderArg::Hash => Some(&hash),
        EmbedderArg::Provider if uses_mock(g) => bail!("--embedder provider needs a real provider"),
        EmbedderArg::Provider => {
            remote = OpenAiProvider::from_config(provider_config(g))?;
            Some(&remote)
        }
        EmbedderArg::None => None,
    };
    let recheck = GatewayRecheck { gateway: &gw, registry: &registry };
    let options = BenchmarkOptions { embedder, semantic: a.semantic_recheck.then_some(&recheck as _) };
    let mut reports = Vec::new();
    eprintln!("{:<22} {:>4} {:>9} {:>9} {:>8} {:>9} {:>6}", "strategy", "n", "R_initial", "R_fix", "I", "corrected", "calls");
    for s in strategies {
        let r = run_benchmark(&dataset, s, &gw, &registry, &options)?;
        let i = r.improvement_i.map_or("n/a".to_string(), |i| format!("{i:.4}"));
        eprintln!(
            "{:<22} {:>4} {:>9.4} {:>9.4} {:>8} {:>9} {:>6}",
            r.strategy, r.n, r.r_initial, r.r_fix, i, r.corrected_count, r.llm_calls
        );
        reports.push(r);
    }
    let json = if reports.len() == 1 {
        to_json(&reports[0], g.pretty)?
    } else {
        to_json(&serde_json::json!({ "schemaVersion": SCHEMA_VERSION, "reports": reports }), g.pretty)?
    };
    emit(json.as_bytes(), a.output.as_deref())?;
    Ok(0)
}

fn taxonomy(g: &Global, action: TaxonomyAction) -> Result<u8> {
    let registry = registry(g)?;
    let mut out = String::new();
    match action {
        TaxonomyAction::List { category, json } => {
            let cat = match category.as_deref() {
                Some(c) => Some(Category::parse(c).with_context(|| format!("unknown category {c:?}"))?),
                None => None,
            };
            let types = registry.list_types(cat);
            if json {
                out = to_json(&types, g.pretty)?;
            } else {
                for t in types {
                    out.push_str(&format!("{:<36} {:<9} {:<8} {}\n", t.name, t.category.as_str(), t.impact.as_str(), t.wcag_refs.join(", ")));
                }
            }
        }
        TaxonomyAction::Show { name, json } => {
            let t = registry.lookup(&name)?;
            if json {
                out = to_json(t, g.pretty)?;
            } else {
                out = format!(
                    "{}\n  category:      {}\n  impact:        {} (score {})\n  criteria:      {}\n  supplementary: {}\n  {}\n",
                    t.name,
                    t.category,
                    t.impact.label(),
                    t.score(),
                    t.wcag_refs.join(", "),
                    serde_json::to_value(t.supplementary)?.as_str().unwrap_or_default(),
                    t.description
                );
            }
        }
    }
    emit(out.as_bytes(), None)?;
    Ok(0)
}

fn fetch(g: &Global, a: FetchArgs) -> Result<u8> {
    let page = fetch_html(&a.url, Duration::from_secs(g.timeout.max(1)))?;
    warn_all(&page.warnings);
    emit(&page.body, a.output.as_deref())?;
    Ok(0)
}
