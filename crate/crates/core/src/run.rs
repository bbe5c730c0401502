//! The output of parsing a corpus through a generation endpoint.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::prompt::{PromptMode, PromptStyle};

/// Decoding parameters sent with every request.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSettings {
    pub temperature: f64,
    pub num_beams: u32,
    pub max_length: u32,
}

impl GenerationSettings {
    pub const DEFAULT_TEMPERATURE: f64 = 0.0;
    pub const DEFAULT_NUM_BEAMS: u32 = 2;

    pub fn for_style(style: PromptStyle) -> Self {
        Self {
            temperature: Self::DEFAULT_TEMPERATURE,
            num_beams: Self::DEFAULT_NUM_BEAMS,
            max_length: style.default_max_length(),
        }
    }
}

/// Result for one record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseEntry {
    pub index: usize,
    /// Empty when the parse failed.
    pub parsed_template: String,
    pub latency_secs: f64,
    pub attempts: u32,
    pub error: Option<String>,
}

impl ParseEntry {
    pub fn succeeded(index: usize, parsed_template: String, latency_secs: f64, attempts: u32) -> Self {
        Self {
            index,
            parsed_template,
            latency_secs,
            attempts,
            error: None,
        }
    }

    pub fn failed(index: usize, error: String, latency_secs: f64, attempts: u32) -> Self {
        Self {
            index,
            parsed_template: String::new(),
            latency_secs,
            attempts,
            error: Some(error),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some() || self.parsed_template.trim().is_empty()
    }

    /// The parsed template, or `None` for a failed parse.
    pub fn template(&self) -> Option<&str> {
        (!self.is_failed()).then_some(self.parsed_template.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseRun {
    /// One entry per corpus record, ordered by index.
    pub entries: Vec<ParseEntry>,
    pub settings: GenerationSettings,
    pub style: PromptStyle,
    pub mode: PromptMode,
    pub wall_clock_secs: f64,
}

impl ParseRun {
    pub fn failed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_failed()).count()
    }

    /// Parsed templates in record order, `None` for failures.
    pub fn templates(&self) -> Vec<Option<&str>> {
        self.entries.iter().map(ParseEntry::template).collect()
    }
}
