use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "llmparser", version, about = "Few-shot log parsing toolchain")]
pub struct Cli {
    /// Log progress at debug level.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pick diverse few-shot examples from a labelled dataset.
    Sample(SampleArgs),
    /// Parse every log of a dataset through a model endpoint or a mock.
    Parse(ParseArgs),
    /// Score a parse run against ground truth.
    Eval(EvalArgs),
    /// Tabulate evaluation reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Structured CSV dataset. Repeat to pool several systems.
    #[arg(long, required = true, num_args = 1..)]
    pub dataset: Vec<PathBuf>,
    /// Pool every dataset except this system (cross-system training data).
    #[arg(long, value_name = "SYSTEM")]
    pub exclude_system: Option<String>,
    /// Shots JSONL to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Number of shots to draw.
    #[arg(long, default_value_t = 50)]
    pub shots: usize,
    /// Mean Shift bandwidth; estimated from the data when omitted.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long, default_value_t = llmparser_core::sampler::DEFAULT_FEATURE_DIM)]
    pub feature_dim: usize,
    /// Regex matching a log header to strip before clustering.
    #[arg(long)]
    pub header_pattern: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    T5,
    Alpaca,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Finetune,
    Icl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DialectArg {
    Native,
    Openai,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MockArg {
    EchoTruth,
    CorruptK,
    FixedText,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Structured CSV dataset to parse.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Parse run CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the manifest; generation itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base URL of the generation server. LLMPARSER_ENDPOINT takes precedence.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, value_enum, default_value_t = DialectArg::Native)]
    pub endpoint_dialect: DialectArg,
    /// Answer from a built-in mock instead of a server.
    #[arg(long, value_enum)]
    pub mock: Option<MockArg>,
    /// Templates corrupted by the corrupt-k mock.
    #[arg(long, default_value_t = 1)]
    pub mock_k: usize,
    /// Reply of the fixed-text mock.
    #[arg(long, default_value = "")]
    pub mock_text: String,
    #[arg(long, value_enum, default_value_t = StyleArg::T5)]
    pub prompt_style: StyleArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Finetune)]
    pub mode: ModeArg,
    /// Demonstrations per prompt in ICL mode (taken from the head of the shots file).
    #[arg(long)]
    pub icl_shots: Option<usize>,
    /// Shots JSONL written by `sample`; required in ICL mode.
    #[arg(long)]
    pub shots_file: Option<PathBuf>,
    /// Requests kept in flight.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Overrides the style default (256 for t5, 512 for alpaca).
    #[arg(long)]
    pub max_length: Option<u32>,
    /// Reuse parses of byte-identical logs.
    #[arg(long)]
    pub cache: bool,
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Structured CSV dataset holding the ground truth.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Parse run CSV written by `parse`.
    #[arg(long)]
    pub parsed: PathBuf,
    /// Shots used for training; enables seen/unseen and duplicate-excluded metrics.
    #[arg(long)]
    pub shots_file: Option<PathBuf>,
    /// Evaluation report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Text,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation report JSON files, one per system.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// A second report set to compare against with paired t-tests.
    #[arg(long, num_args = 1..)]
    pub compare: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
    pub format: FormatArg,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
