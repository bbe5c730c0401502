//! Drives a generation endpoint over a corpus.

mod backend;
mod http;
mod mock;
mod server;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use llmparser_core::prompt::{extract_template, PromptError};
use llmparser_core::{
    Corpus, GenerationSettings, ParseEntry, ParseRun, PromptMode, PromptSpec, PromptStyle, PromptText, Shot,
};
use serde::{Deserialize, Serialize};

pub use backend::{BackendError, GenerationBackend, GenerationRequest, GenerationResponse};
pub use http::HttpBackend;
pub use mock::{drop_last_placeholder, mock_backend, select_corruptible_templates, MockBackend, MockKind, MockParams};
pub use server::GenerationServer;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF_BASE: Duration = Duration::from_secs(1);
const BACKOFF_FACTOR: u32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointDialect {
    #[default]
    Native,
    OpenAi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub settings: GenerationSettings,
    pub endpoint_url: String,
    pub dialect: EndpointDialect,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry delay; each further retry doubles it.
    pub backoff_base: Duration,
    pub parallelism: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error("endpoint unreachable after {attempts} attempts: {last}")]
    EndpointUnreachable { attempts: u32, last: String },
    #[error("{0}")]
    GenerationFailed(String),
    #[error("completion contained no template")]
    EmptyCompletion,
    #[error("mock backend has no entry for log: {0}")]
    UnknownLog(String),
    #[error("in-context mode needs demonstrations")]
    MissingDemonstrations,
    #[error(transparent)]
    Prompt(PromptError),
    #[error("{failed} of {total} records failed to parse")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid generation config: {0}")]
    InvalidConfig(&'static str),
}

impl From<PromptError> for InferenceError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::EmptyCompletion => Self::EmptyCompletion,
            PromptError::EmptyDemonstrations => Self::MissingDemonstrations,
            other => Self::Prompt(other),
        }
    }
}

impl GenerationConfig {
    pub fn for_style(style: PromptStyle, endpoint_url: impl Into<String>) -> Self {
        Self {
            settings: GenerationSettings::for_style(style),
            endpoint_url: endpoint_url.into(),
            dialect: EndpointDialect::Native,
            timeout: DEFAULT_TIMEOUT,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff_base: DEFAULT_BACKOFF_BASE,
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let s = &self.settings;
        if !s.temperature.is_finite() || s.temperature < 0.0 {
            return Err(InferenceError::InvalidConfig("temperature must be >= 0"));
        }
        if s.num_beams == 0 {
            return Err(InferenceError::InvalidConfig("num_beams must be >= 1"));
        }
        if s.max_length == 0 {
            return Err(InferenceError::InvalidConfig("max_length must be > 0"));
        }
        if self.parallelism == 0 {
            return Err(InferenceError::InvalidConfig("parallelism must be >= 1"));
        }
        Ok(())
    }

    fn request(&self, prompt: &PromptText) -> GenerationRequest {
        GenerationRequest {
            prompt: prompt.text.clone(),
            temperature: self.settings.temperature,
            num_beams: self.settings.num_beams,
            max_length: self.settings.max_length,
        }
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        self.backoff_base
            .saturating_mul(BACKOFF_FACTOR.saturating_pow(retry.saturating_sub(1)))
    }
}

/// Parses one prompt and reports how many requests it took.
pub fn parse_log_counted(
    prompt: &PromptText,
    config: &GenerationConfig,
    backend: &dyn GenerationBackend,
) -> (Result<String, InferenceError>, u32) {
    let request = config.request(prompt);
    let mut attempts = 0;
    loop {
        attempts += 1;
        match backend.generate(&request) {
            Ok(text) => return (extract_template(prompt.style, &text).map_err(Into::into), attempts),
            Err(BackendError::Transport(last)) => {
                if attempts > config.max_retries {
                    return (Err(InferenceError::EndpointUnreachable { attempts, last }), attempts);
                }
                let delay = config.backoff(attempts);
                log::debug!("transport error ({last}); retrying in {delay:?}");
                std::thread::sleep(delay);
            }
            Err(BackendError::Generation(msg)) => return (Err(InferenceError::GenerationFailed(msg)), attempts),
            Err(BackendError::UnknownLog(log)) => return (Err(InferenceError::UnknownLog(log)), attempts),
        }
    }
}

/// Requests a completion for `prompt` and extracts the template from it.
/// Transport errors are retried up to `max_retries` times.
pub fn parse_log(
    prompt: &PromptText,
    config: &GenerationConfig,
    backend: &dyn GenerationBackend,
) -> Result<String, InferenceError> {
    parse_log_counted(prompt, config, backend).0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    pub style: PromptStyle,
    pub mode: PromptMode,
    /// Used only in in-context mode.
    pub demonstrations: Vec<Shot>,
    /// Reuse a finished parse for byte-identical log content.
    pub cache: bool,
}

impl ParseOptions {
    pub fn fine_tuned(style: PromptStyle) -> Self {
        Self {
            style,
            mode: PromptMode::FineTune,
            demonstrations: Vec::new(),
            cache: false,
        }
    }

    pub fn icl(style: PromptStyle, demonstrations: Vec<Shot>) -> Self {
        Self {
            style,
            mode: PromptMode::Icl,
            demonstrations,
            cache: false,
        }
    }
}

type Cache = Mutex<HashMap<String, Result<String, String>>>;

fn parse_one(
    log: &str,
    options: &ParseOptions,
    config: &GenerationConfig,
    backend: &dyn GenerationBackend,
) -> (Result<String, String>, u32) {
    let demos = match options.mode {
        PromptMode::FineTune => Vec::new(),
        PromptMode::Icl => options.demonstrations.clone(),
    };
    let prompt = match PromptSpec::new(options.style, options.mode, demos, log).and_then(|s| s.render()) {
        Ok(p) => p,
        Err(e) => return (Err(InferenceError::from(e).to_string()), 0),
    };
    let (result, attempts) = parse_log_counted(&prompt, config, backend);
    (result.map_err(|e| e.to_string()), attempts)
}

/// Parses every record of `corpus`, keeping at most `config.parallelism`
/// requests in flight. Entries come back in record order. Individual
/// failures are recorded on their entry; the run as a whole fails only when
/// more than half of the records fail.
pub fn parse_corpus(
    corpus: &Corpus,
    options: &ParseOptions,
    config: &GenerationConfig,
    backend: &dyn GenerationBackend,
) -> Result<ParseRun, InferenceError> {
    config.validate()?;
    if options.mode == PromptMode::Icl && options.demonstrations.is_empty() {
        return Err(InferenceError::MissingDemonstrations);
    }
    let started = Instant::now();
    let records = corpus.records();
    let next = AtomicUsize::new(0);
    let cache: Option<Cache> = options.cache.then(|| Mutex::new(HashMap::new()));
    let (tx, rx) = mpsc::channel::<(usize, ParseEntry)>();

    std::thread::scope(|scope| {
        for _ in 0..config.parallelism.min(records.len().max(1)) {
            let tx = tx.clone();
            let (next, cache) = (&next, &cache);
            scope.spawn(move || loop {
                let slot = next.fetch_add(1, Ordering::Relaxed);
                let Some(record) = records.get(slot) else { break };
                let t0 = Instant::now();
                let cached = cache
                    .as_ref()
                    .and_then(|c| c.lock().expect("cache lock").get(&record.content).cloned());
                let (result, attempts) = match cached {
                    Some(hit) => (hit, 0),
                    None => {
                        let (r, a) = parse_one(&record.content, options, config, backend);
                        if let Some(c) = cache {
                            c.lock().expect("cache lock").insert(record.content.clone(), r.clone());
                        }
                        (r, a)
                    }
                };
                let latency = t0.elapsed().as_secs_f64();
                let entry = match result {
                    Ok(t) => ParseEntry::succeeded(record.index, t, latency, attempts),
                    Err(e) => ParseEntry::failed(record.index, e, latency, attempts),
                };
                if tx.send((slot, entry)).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);

    let mut slots: Vec<Option<ParseEntry>> = vec![None; records.len()];
    for (slot, entry) in rx {
        slots[slot] = Some(entry);
    }
    let entries: Vec<ParseEntry> = slots
        .into_iter()
        .map(|e| e.expect("every record produces an entry"))
        .collect();

    let run = ParseRun {
        entries,
        settings: config.settings,
        style: options.style,
        mode: options.mode,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    let failed = run.failed_count();
    let total = run.entries.len();
    for e in run.entries.iter().filter(|e| e.is_failed()) {
        log::warn!("record {} failed: {}", e.index, e.error.as_deref().unwrap_or("empty template"));
    }
    if failed * 2 > total {
        return Err(InferenceError::TooManyFailures { failed, total });
    }
    Ok(run)
}
