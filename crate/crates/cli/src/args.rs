use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qaforge", version, about = "Build curated QA datasets from a reference library")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Disable data-parallel execution.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse BibTeX / NBIB files, deduplicate and write a record store.
    Ingest(IngestArgs),
    /// Run the curation web service.
    Serve(ServeArgs),
    /// Render a prompt template to stdout.
    Render(RenderArgs),
    /// Sample a QA subset and emit a fine-tuning bundle.
    Sample(SampleArgs),
    /// Generate QA pairs from paper abstracts with a model backend.
    Generate(GenerateArgs),
    /// Summarise reviewer score cards per model.
    Score(ScoreArgs),
    /// Tabulate best eval loss by QA size and model.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputType {
    Yaml,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mock,
    Http,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// BibTeX input files.
    #[arg(long = "bibtex_files", num_args = 1.., value_name = "PATH")]
    pub bibtex_files: Vec<PathBuf>,
    /// MEDLINE (.nbib) input files.
    #[arg(long = "nbib_files", num_args = 1.., value_name = "PATH")]
    pub nbib_files: Vec<PathBuf>,
    /// Store format to write.
    #[arg(long = "output_type", value_enum, default_value = "yaml")]
    pub output_type: OutputType,
    /// Output path for --output_type yaml.
    #[arg(long = "yaml_file", value_name = "PATH")]
    pub yaml_file: Option<PathBuf>,
    /// Output path for --output_type jsonl.
    #[arg(long = "jsonl_file", value_name = "PATH")]
    pub jsonl_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Port to bind (1-65535).
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    /// QA JSONL file to append submissions to.
    #[arg(long, default_value = "qa_data.jsonl", value_name = "PATH")]
    pub file: PathBuf,
    /// Record store (.yaml or .jsonl) for paper lookup and bulk upload.
    #[arg(long, value_name = "PATH")]
    pub records: Option<PathBuf>,
    /// Directory of static UI assets served at /.
    #[arg(long = "static", value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
    /// fsync the QA file after every submission.
    #[arg(long)]
    pub fsync: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Template name (built-in: qa_generation).
    #[arg(long, default_value = "qa_generation")]
    pub template: String,
    /// Directory of additional *.tpl templates.
    #[arg(long = "templates_dir", value_name = "DIR")]
    pub templates_dir: Option<PathBuf>,
    /// A record JSON line, or key=value pairs (repeatable).
    #[arg(long, num_args = 1.., value_name = "JSON|KEY=VALUE")]
    pub context: Vec<String>,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Curated QA JSONL file.
    #[arg(long, value_name = "PATH")]
    pub qa: PathBuf,
    /// Number of pairs to sample.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Record store supplying abstracts.
    #[arg(long, value_name = "PATH")]
    pub records: PathBuf,
    /// Bundle directory to create.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Base model recorded in the bundle.
    #[arg(long, default_value = "meta-llama/Llama-3.2-1B")]
    pub model: String,
    /// Maximum held-out examples in eval.jsonl.
    #[arg(long = "eval_size", default_value_t = 100)]
    pub eval_size: usize,
    /// Token budget per example.
    #[arg(long = "max_token_len", default_value_t = 512)]
    pub max_token_len: usize,
    /// Also run the synthetic trainer and append its result to this file.
    #[arg(long = "stub_results", value_name = "PATH")]
    pub stub_results: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Record store to generate from.
    #[arg(long, value_name = "PATH")]
    pub records: PathBuf,
    /// Prompt template name.
    #[arg(long, default_value = "qa_generation")]
    pub template: String,
    /// Directory of additional *.tpl templates.
    #[arg(long = "templates_dir", value_name = "DIR")]
    pub templates_dir: Option<PathBuf>,
    /// Model backend.
    #[arg(long, value_enum, default_value = "mock")]
    pub backend: BackendKind,
    /// Completion endpoint for the http backend.
    #[arg(long, env = "QAFORGE_BACKEND_URL", value_name = "URL")]
    pub endpoint: Option<String>,
    /// Model name sent to the http backend.
    #[arg(long, default_value = "qa-generator")]
    pub model: String,
    /// JSON path of the generated text in the http response.
    #[arg(long = "response_path", default_value = "choices[0].text")]
    pub response_path: String,
    /// QA JSONL file to append generated pairs to.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Write every raw model response here (JSONL) for audit.
    #[arg(long = "audit_file", value_name = "PATH")]
    pub audit_file: Option<PathBuf>,
    #[arg(long = "max_tokens", default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    /// Stop sequence (repeatable).
    #[arg(long)]
    pub stop: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Score card JSONL file.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// QA file whose pairs were scored, as [label=]path; repeatable. The
    /// label (default: file stem) names the model group.
    #[arg(long, value_name = "[LABEL=]PATH")]
    pub qa: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub report: TableFormat,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Experiment results JSONL file.
    #[arg(long, value_name = "PATH")]
    pub results: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: TableFormat,
}
