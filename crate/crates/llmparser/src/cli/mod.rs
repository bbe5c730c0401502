//! The `llmparser` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 bad data, 3 runtime failure.

mod args;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::Parser;
use llmparser_core::evaluate::build_report_from_entries;
use llmparser_core::sampler::{sample_shots_detailed, SamplerConfig, SamplerError};
use llmparser_core::{assemble_cross_system, Corpus, HeaderPattern, PromptMode, PromptStyle, ShotSet};
use serde_json::json;

pub use args::*;

use crate::dataset::{load_dataset, DatasetFormat};
use crate::inference::{
    mock_backend, parse_corpus, EndpointDialect, GenerationBackend, GenerationConfig, HttpBackend, InferenceError,
    MockKind, MockParams, ParseOptions,
};
use crate::manifest::{unix_ms, RunManifest};
use crate::report::{load_report, summary_table, ReportError, TableFormat};
use crate::run_file::{load_parse_rows, rows_to_entries, save_parse_run};
use crate::shots_file::{load_shots, save_shots};

pub const ENDPOINT_ENV: &str = "LLMPARSER_ENDPOINT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(cli.verbose);
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: bool) {
    let level = if verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, out),
        Command::Parse(a) => cmd_parse(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Report(a) => cmd_report(a, out),
    }
}

fn load(path: &Path) -> Result<Corpus, CliError> {
    load_dataset(path, DatasetFormat::StructuredCsv).map_err(data)
}

fn path_strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn finish(manifest: RunManifest, artifact: &Path) -> Result<(), CliError> {
    manifest
        .finish(artifact)
        .map(|_| ())
        .map_err(|e| runtime(format!("cannot write manifest for {}: {e}", artifact.display())))
}

fn cmd_sample(a: &SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = unix_ms();
    let config = SamplerConfig {
        n_shots: a.shots,
        seed: a.seed,
        bandwidth: a.bandwidth,
        feature_dim: a.feature_dim,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let header = a
        .header_pattern
        .as_deref()
        .map(HeaderPattern::new)
        .transpose()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let corpora = a.dataset.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let corpus = match (&a.exclude_system, corpora.len()) {
        (Some(target), _) => assemble_cross_system(&corpora, target).map_err(data)?,
        (None, 1) => corpora.into_iter().next().expect("one corpus"),
        (None, _) => {
            return Err(CliError::Usage(
                "several datasets need --exclude-system to name the held-out system".into(),
            ))
        }
    };

    let outcome = sample_shots_detailed(&corpus, &config, header.as_ref()).map_err(|e| match e {
        SamplerError::InvalidConfig(_) | SamplerError::InvalidBandwidth(_) => CliError::Usage(e.to_string()),
        other => data(other),
    })?;
    save_shots(&a.out, &outcome.shots).map_err(|e| runtime(format!("cannot write {}: {e}", a.out.display())))?;

    let mut manifest = RunManifest::new("sample", started);
    manifest.datasets = path_strings(&a.dataset);
    manifest.seed = Some(a.seed);
    manifest.config = json!({
        "n_shots": a.shots,
        "bandwidth": a.bandwidth,
        "bandwidth_used": outcome.bandwidth,
        "feature_dim": a.feature_dim,
        "header_pattern": a.header_pattern,
        "exclude_system": a.exclude_system,
    });
    manifest.outputs = vec![a.out.display().to_string()];
    finish(manifest, &a.out)?;

    writeln!(
        out,
        "{}: {} logs, {} clusters, {} passes, {} shots written to {}",
        outcome.shots.system,
        corpus.len(),
        outcome.clusters.len(),
        outcome.shots.passes(),
        outcome.shots.len(),
        a.out.display()
    )
    .map_err(runtime)
}

fn style(s: StyleArg) -> PromptStyle {
    match s {
        StyleArg::T5 => PromptStyle::T5,
        StyleArg::Alpaca => PromptStyle::Alpaca,
    }
}

fn load_shot_set(path: &Path) -> Result<ShotSet, CliError> {
    load_shots(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_parse(a: &ParseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = unix_ms();
    let style = style(a.prompt_style);
    let mode = match a.mode {
        ModeArg::Finetune => PromptMode::FineTune,
        ModeArg::Icl => PromptMode::Icl,
    };

    let demonstrations = match mode {
        PromptMode::FineTune => Vec::new(),
        PromptMode::Icl => {
            let path = a
                .shots_file
                .as_ref()
                .ok_or_else(|| CliError::Usage("--mode icl requires --shots-file".into()))?;
            let set = load_shot_set(path)?;
            let k = a.icl_shots.unwrap_or(set.len());
            if k == 0 {
                return Err(CliError::Usage("--icl-shots must be at least 1".into()));
            }
            if k > set.len() {
                return Err(CliError::Data(format!(
                    "--icl-shots {k} but {} holds only {} shots",
                    path.display(),
                    set.len()
                )));
            }
            set.shots.into_iter().take(k).collect()
        }
    };

    let endpoint = std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()).or_else(|| a.endpoint.clone());
    if a.mock.is_none() && endpoint.is_none() {
        return Err(CliError::Usage(format!("give --endpoint, set {ENDPOINT_ENV}, or pick a --mock")));
    }

    let mut config = GenerationConfig::for_style(style, endpoint.clone().unwrap_or_default());
    if let Some(m) = a.max_length {
        config.settings.max_length = m;
    }
    config.dialect = match a.endpoint_dialect {
        DialectArg::Native => EndpointDialect::Native,
        DialectArg::Openai => EndpointDialect::OpenAi,
    };
    config.timeout = Duration::from_secs(a.timeout_secs);
    config.max_retries = a.max_retries;
    config.parallelism = a.parallelism;
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let corpus = load(&a.dataset)?;
    let backend: Arc<dyn GenerationBackend> = match a.mock {
        Some(kind) => {
            let kind = match kind {
                MockArg::EchoTruth => MockKind::EchoTruth,
                MockArg::CorruptK => MockKind::CorruptK,
                MockArg::FixedText => MockKind::FixedText,
            };
            let params = MockParams {
                k: a.mock_k,
                text: a.mock_text.clone(),
            };
            Arc::new(mock_backend(kind, &corpus, &params))
        }
        None => Arc::new(HttpBackend::new(&config)),
    };

    let options = ParseOptions {
        style,
        mode,
        demonstrations,
        cache: a.cache,
    };
    let run = parse_corpus(&corpus, &options, &config, backend.as_ref()).map_err(|e| match e {
        InferenceError::InvalidConfig(_) | InferenceError::MissingDemonstrations => CliError::Usage(e.to_string()),
        other => runtime(other),
    })?;
    save_parse_run(&a.out, &run, &corpus).map_err(|e| runtime(format!("cannot write {}: {e}", a.out.display())))?;

    let mut manifest = RunManifest::new("parse", started);
    manifest.datasets = vec![a.dataset.display().to_string()];
    manifest.seed = a.seed;
    manifest.config = json!({
        "prompt_style": style.as_str(),
        "mode": mode.as_str(),
        "settings": run.settings,
        "endpoint": if a.mock.is_some() { None } else { endpoint },
        "endpoint_dialect": config.dialect,
        "mock": a.mock.map(|m| format!("{m:?}")),
        "mock_k": a.mock_k,
        "icl_shots": options.demonstrations.len(),
        "shots_file": a.shots_file.as_ref().map(|p| p.display().to_string()),
        "parallelism": config.parallelism,
        "cache": a.cache,
        "timeout_secs": a.timeout_secs,
        "max_retries": a.max_retries,
        "wall_clock_secs": run.wall_clock_secs,
    });
    manifest.outputs = vec![a.out.display().to_string()];
    manifest.notes = run
        .entries
        .iter()
        .filter(|e| e.is_failed())
        .map(|e| format!("record {}: {}", e.index, e.error.as_deref().unwrap_or("empty template")))
        .collect();
    finish(manifest, &a.out)?;

    writeln!(
        out,
        "{}: parsed {} logs ({} failed) in {:.2}s, written to {}",
        corpus.system_name(),
        run.entries.len(),
        run.failed_count(),
        run.wall_clock_secs,
        a.out.display()
    )
    .map_err(runtime)
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = unix_ms();
    let corpus = load(&a.dataset)?;
    let rows = load_parse_rows(&a.parsed).map_err(|e| CliError::Data(format!("{}: {e}", a.parsed.display())))?;
    let entries = rows_to_entries(&rows, &corpus).map_err(data)?;
    let shots = a.shots_file.as_deref().map(load_shot_set).transpose()?;
    let report = build_report_from_entries(&entries, &corpus, shots.as_ref()).map_err(data)?;
    crate::report::save_report(&a.out, &report).map_err(|e| runtime(format!("cannot write {}: {e}", a.out.display())))?;

    let mut manifest = RunManifest::new("eval", started);
    let mut inputs = vec![a.dataset.display().to_string(), a.parsed.display().to_string()];
    if let Some(p) = &a.shots_file {
        inputs.push(p.display().to_string());
    }
    manifest.datasets = inputs;
    manifest.seed = shots.as_ref().map(|s| s.seed);
    manifest.outputs = vec![a.out.display().to_string()];
    finish(manifest, &a.out)?;

    writeln!(
        out,
        "{}: GA {:.4}  PA {:.4}  ({} logs, {} failed)",
        report.system, report.ga, report.pa, report.n_logs, report.n_failed
    )
    .map_err(runtime)
}

fn load_reports(paths: &[PathBuf]) -> Result<Vec<llmparser_core::EvalReport>, CliError> {
    paths
        .iter()
        .map(|p| load_report(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))))
        .collect()
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = unix_ms();
    let reports = load_reports(&a.reports)?;
    let compare = if a.compare.is_empty() { None } else { Some(load_reports(&a.compare)?) };
    let table = summary_table(&reports, compare.as_deref()).map_err(|e| match e {
        ReportError::Schema(_) | ReportError::Json(_) | ReportError::Io(_) => data(e),
    })?;
    let format = match a.format {
        FormatArg::Markdown => TableFormat::Markdown,
        FormatArg::Text => TableFormat::Text,
    };
    let text = table.render(format);
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
            let mut manifest = RunManifest::new("report", started);
            let mut inputs = path_strings(&a.reports);
            inputs.extend(path_strings(&a.compare));
            manifest.datasets = inputs;
            manifest.config = json!({ "format": format!("{:?}", a.format).to_lowercase() });
            manifest.outputs = vec![path.display().to_string()];
            finish(manifest, path)
        }
        None => out.write_all(text.as_bytes()).map_err(runtime),
    }
}
