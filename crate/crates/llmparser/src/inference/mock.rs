//! Deterministic stand-ins for a model server.
//!
//! Truth-keyed mocks look up the target log embedded in the prompt and answer
//! with its ground-truth template. Alpaca prompts get a quoted answer on a new
//! line, as a fine-tuned model would produce; T5 prompts get the bare template.

use std::collections::{BTreeSet, HashMap};

use llmparser_core::prompt::{detect_style, embedded_target_log};
use llmparser_core::{Corpus, PromptStyle};

use super::backend::{BackendError, GenerationBackend, GenerationRequest};

const PLACEHOLDER: &str = "<*>";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MockKind {
    EchoTruth,
    CorruptK,
    FixedText,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MockParams {
    /// Number of templates `CorruptK` corrupts.
    pub k: usize,
    /// Reply of `FixedText`.
    pub text: String,
}

#[derive(Clone, Debug)]
enum Behaviour {
    Echo,
    Corrupt(BTreeSet<String>),
    Fixed(String),
}

#[derive(Clone, Debug)]
pub struct MockBackend {
    /// content -> ground truth, first occurrence wins
    table: HashMap<String, String>,
    behaviour: Behaviour,
}

fn truth_table(corpus: &Corpus) -> HashMap<String, String> {
    let mut table = HashMap::with_capacity(corpus.len());
    for r in corpus {
        table.entry(r.content.clone()).or_insert_with(|| r.truth_template.clone());
    }
    table
}

/// `template` with its last `<*>` removed.
pub fn drop_last_placeholder(template: &str) -> String {
    match template.rfind(PLACEHOLDER) {
        Some(at) => format!("{}{}", &template[..at], &template[at + PLACEHOLDER.len()..]),
        None => template.to_string(),
    }
}

/// The first `k` distinct templates containing `<*>`, in corpus order.
pub fn select_corruptible_templates(corpus: &Corpus, k: usize) -> BTreeSet<String> {
    let mut picked = Vec::new();
    for r in corpus {
        if picked.len() == k {
            break;
        }
        if r.truth_template.contains(PLACEHOLDER) && !picked.contains(&r.truth_template) {
            picked.push(r.truth_template.clone());
        }
    }
    picked.into_iter().collect()
}

impl MockBackend {
    pub fn echo_truth(corpus: &Corpus) -> Self {
        Self {
            table: truth_table(corpus),
            behaviour: Behaviour::Echo,
        }
    }

    /// Echoes the truth except for logs of `k` templates, which lose their
    /// last `<*>`. See [`select_corruptible_templates`].
    pub fn corrupt_k(corpus: &Corpus, k: usize) -> Self {
        Self::corrupt_templates(corpus, select_corruptible_templates(corpus, k))
    }

    pub fn corrupt_templates(corpus: &Corpus, templates: BTreeSet<String>) -> Self {
        Self {
            table: truth_table(corpus),
            behaviour: Behaviour::Corrupt(templates),
        }
    }

    pub fn fixed_text(text: impl Into<String>) -> Self {
        Self {
            table: HashMap::new(),
            behaviour: Behaviour::Fixed(text.into()),
        }
    }

    pub fn corrupted_templates(&self) -> Option<&BTreeSet<String>> {
        match &self.behaviour {
            Behaviour::Corrupt(t) => Some(t),
            _ => None,
        }
    }
}

/// Builds a mock of the given kind.
pub fn mock_backend(kind: MockKind, corpus: &Corpus, params: &MockParams) -> MockBackend {
    match kind {
        MockKind::EchoTruth => MockBackend::echo_truth(corpus),
        MockKind::CorruptK => MockBackend::corrupt_k(corpus, params.k),
        MockKind::FixedText => MockBackend::fixed_text(params.text.clone()),
    }
}

impl GenerationBackend for MockBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let truth = match &self.behaviour {
            Behaviour::Fixed(text) => return Ok(text.clone()),
            Behaviour::Echo | Behaviour::Corrupt(_) => {
                let log = embedded_target_log(&request.prompt)
                    .ok_or_else(|| BackendError::Generation("prompt has no recognisable target log".into()))?;
                self.table
                    .get(log)
                    .ok_or_else(|| BackendError::UnknownLog(log.to_string()))?
            }
        };
        let answer = match &self.behaviour {
            Behaviour::Corrupt(set) if set.contains(truth) => drop_last_placeholder(truth),
            _ => truth.clone(),
        };
        Ok(match detect_style(&request.prompt) {
            Some(PromptStyle::Alpaca) => format!("\n'{answer}'"),
            _ => answer,
        })
    }
}
