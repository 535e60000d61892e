mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Detect and correct Web accessibility violations in HTML.
///
/// Exit codes: 0 success with no findings, 1 findings reported, 2 error.
#[derive(Debug, Parser)]
#[command(name = "a11y-mend", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Taxonomy JSON replacing the bundled one.
    #[arg(long, global = true)]
    pub taxonomy: Option<PathBuf>,
    /// Model provider.
    #[arg(long, value_enum, default_value_t = ProviderKind::Openai, global = true)]
    pub provider: ProviderKind,
    /// Scripted mock provider; implies `--provider mock`.
    #[arg(long, global = true, value_name = "SCRIPT")]
    pub mock: Option<PathBuf>,
    #[arg(long, global = true, default_value = "gpt-4o")]
    pub model: String,
    /// Base URL of an OpenAI-compatible API.
    #[arg(long, global = true, default_value = "https://api.openai.com/v1")]
    pub endpoint: String,
    #[arg(long, global = true, default_value = "text-embedding-3-small")]
    pub embedding_model: String,
    /// Name of the environment variable holding the API key.
    #[arg(long, global = true, default_value = a11y_mend::llm::openai::API_KEY_ENV)]
    pub api_key_env: String,
    /// Maximum concurrent model calls.
    #[arg(long, global = true, default_value_t = 4)]
    pub parallel: usize,
    /// Retries for timeouts, rate limits and transport errors.
    #[arg(long, global = true, default_value_t = 3)]
    pub retries: u32,
    /// Per-request timeout in seconds.
    #[arg(long, global = true, default_value_t = 120)]
    pub timeout: u64,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Openai,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Accessguru,
    AccessguruNoReprompt,
    Contextual,
    React,
    ZeroShot,
}

impl From<StrategyArg> for a11y_mend::correct::Strategy {
    fn from(s: StrategyArg) -> Self {
        use a11y_mend::correct::Strategy;
        match s {
            StrategyArg::Accessguru => Strategy::AccessGuru,
            StrategyArg::AccessguruNoReprompt => Strategy::AccessGuruNoReprompt,
            StrategyArg::Contextual => Strategy::Contextual,
            StrategyArg::React => Strategy::ReAct,
            StrategyArg::ZeroShot => Strategy::ZeroShot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedderArg {
    /// Offline hashed bag of words.
    Hash,
    /// The provider's embedding endpoint.
    Provider,
    None,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan an HTML file and write a detection report.
    Detect(DetectArgs),
    /// Generate corrections for every entry of a detection report.
    Correct(CorrectArgs),
    /// Write the corrections of a report into the HTML file.
    Apply(ApplyArgs),
    /// Compare a detection report with its corrections.
    Evaluate(EvaluateArgs),
    /// Run correction strategies over a dataset.
    Benchmark(BenchmarkArgs),
    /// Inspect the violation taxonomy.
    Taxonomy {
        #[command(subcommand)]
        action: TaxonomyAction,
    },
    /// Download a page's HTML.
    Fetch(FetchArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// HTML file, or `-` for standard input.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub url: String,
    #[arg(long, default_value = "")]
    pub domain: String,
    /// Screenshot of the rendered page, for semantic detection.
    #[arg(long)]
    pub screenshot: Option<PathBuf>,
    /// Viewport width the screenshot was taken at.
    #[arg(long, default_value_t = 1440)]
    pub viewport_width: u32,
    /// Ask the model for semantic violations.
    #[arg(long)]
    pub semantic: bool,
    /// Acknowledge that no screenshot exists; semantic detection is skipped.
    #[arg(long, conflicts_with = "screenshot")]
    pub no_screenshot: bool,
    /// Download images referenced by semantic findings.
    #[arg(long)]
    pub download_images: bool,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    /// Detection report from `detect`.
    pub report: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Accessguru)]
    pub strategy: StrategyArg,
    /// Re-detect semantic violations in candidates with the model.
    #[arg(long)]
    pub semantic_recheck: bool,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// HTML file, or `-` for standard input.
    pub input: PathBuf,
    /// Corrections report from `correct`.
    pub corrections: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Detection report before correction.
    pub before: PathBuf,
    /// Corrections report.
    pub after: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub dataset: PathBuf,
    /// Strategies to run; all five when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub strategy: Vec<StrategyArg>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Embedding backend for the similarity table.
    #[arg(long, value_enum)]
    pub embedder: Option<EmbedderArg>,
    #[arg(long)]
    pub semantic_recheck: bool,
}

#[derive(Debug, Subcommand)]
pub enum TaxonomyAction {
    /// List violation types.
    List {
        #[arg(long)]
        category: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Show one violation type.
    Show {
        name: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    pub url: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
