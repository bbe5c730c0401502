//! Hard-prompt rendering and completion post-processing.
//!
//! Two prompt styles are supported. The T5 style is a single instruction
//! line whose answer is the bare template:
//!
//! ```text
//! Parse the raw log to log template: 'Got assigned task 0'.
//! Got assigned task <*>
//! ```
//!
//! The Alpaca style wraps the log in the instruction/input/response
//! scaffold and quotes the answer after `### Response:`.
//!
//! In-context prompts concatenate completed demonstration pairs, separated
//! by one blank line, followed by the open target prompt.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sampler::Shot;

pub const T5_INSTRUCTION: &str = "Parse the raw log to log template: ";
pub const ALPACA_PREAMBLE: &str = "Below is an instruction that describes a task, paired with an input that provides further context. Write a response that appropriately completes the request.";
pub const ALPACA_INSTRUCTION: &str = "Parse the input log to the log template.";
pub const RESPONSE_MARKER: &str = "### Response:";
pub const DEMONSTRATION_SEPARATOR: &str = "\n\n";

const ALPACA_INPUT_OPEN: &str = "### Input:\n'";
const ALPACA_INPUT_CLOSE: &str = "'\n\n### Response:";
const T5_CLOSE: &str = "'.";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("log is empty")]
    EmptyLog,
    #[error("in-context prompt needs at least one demonstration")]
    EmptyDemonstrations,
    #[error("fine-tune prompts take no demonstrations")]
    UnexpectedDemonstrations,
    #[error("completion holds no template")]
    EmptyCompletion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    T5,
    Alpaca,
}

impl PromptStyle {
    /// Generation length used with this style's models.
    pub fn default_max_length(self) -> u32 {
        match self {
            PromptStyle::T5 => 256,
            PromptStyle::Alpaca => 512,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptStyle::T5 => "t5",
            PromptStyle::Alpaca => "alpaca",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    #[serde(rename = "finetune")]
    FineTune,
    Icl,
}

impl PromptMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptMode::FineTune => "finetune",
            PromptMode::Icl => "icl",
        }
    }
}

/// Where the answer starts in a completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerRegion {
    /// The whole generated text is the answer.
    EndOfOutput,
    /// The answer follows the last occurrence of the marker.
    AfterMarker(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptText {
    pub style: PromptStyle,
    pub text: String,
    /// Expected answer for training pairs, exactly as a model should emit it.
    pub answer: Option<String>,
    pub expected_stop: AnswerRegion,
}

fn check_log(log: &str) -> Result<(), PromptError> {
    if log.trim().is_empty() {
        Err(PromptError::EmptyLog)
    } else {
        Ok(())
    }
}

fn t5_open(log: &str) -> String {
    format!("{T5_INSTRUCTION}'{log}{T5_CLOSE}")
}

fn alpaca_open(log: &str) -> String {
    format!(
        "{ALPACA_PREAMBLE}\n\n### Instruction:\n{ALPACA_INSTRUCTION}\n\n{ALPACA_INPUT_OPEN}{log}{ALPACA_INPUT_CLOSE}"
    )
}

/// T5-style prompt. With a template, the answer is the template verbatim.
pub fn build_t5_prompt(log: &str, template: Option<&str>) -> Result<PromptText, PromptError> {
    check_log(log)?;
    Ok(PromptText {
        style: PromptStyle::T5,
        text: t5_open(log),
        answer: template.map(String::from),
        expected_stop: AnswerRegion::EndOfOutput,
    })
}

/// Alpaca-style prompt. With a template the quoted answer follows
/// `### Response:`; without one the prompt ends at the marker.
pub fn build_alpaca_prompt(log: &str, template: Option<&str>) -> Result<PromptText, PromptError> {
    check_log(log)?;
    let mut text = alpaca_open(log);
    let answer = template.map(|t| format!("'{t}'"));
    if let Some(a) = &answer {
        text.push('\n');
        text.push_str(a);
    }
    Ok(PromptText {
        style: PromptStyle::Alpaca,
        text,
        answer,
        expected_stop: AnswerRegion::AfterMarker(RESPONSE_MARKER),
    })
}

pub fn build_prompt(
    style: PromptStyle,
    log: &str,
    template: Option<&str>,
) -> Result<PromptText, PromptError> {
    match style {
        PromptStyle::T5 => build_t5_prompt(log, template),
        PromptStyle::Alpaca => build_alpaca_prompt(log, template),
    }
}

/// A `(log, template)` pair rendered as one block of text.
pub fn render_completed_pair(
    style: PromptStyle,
    log: &str,
    template: &str,
) -> Result<String, PromptError> {
    Ok(match style {
        PromptStyle::T5 => {
            check_log(log)?;
            format!("{}\n{template}", t5_open(log))
        }
        PromptStyle::Alpaca => build_alpaca_prompt(log, Some(template))?.text,
    })
}

/// Demonstrations rendered as completed pairs joined by blank lines.
pub fn render_demonstrations(style: PromptStyle, demonstrations: &[Shot]) -> Result<String, PromptError> {
    let blocks = demonstrations
        .iter()
        .map(|s| render_completed_pair(style, &s.log, &s.template))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(blocks.join(DEMONSTRATION_SEPARATOR))
}

/// In-context prompt: every demonstration, in order, then the open target.
pub fn build_icl_prompt(
    style: PromptStyle,
    demonstrations: &[Shot],
    log: &str,
) -> Result<PromptText, PromptError> {
    if demonstrations.is_empty() {
        return Err(PromptError::EmptyDemonstrations);
    }
    check_log(log)?;
    let mut target = build_prompt(style, log, None)?;
    let mut text = render_demonstrations(style, demonstrations)?;
    text.push_str(DEMONSTRATION_SEPARATOR);
    text.push_str(&target.text);
    target.text = text;
    Ok(target)
}

/// Full description of one inference prompt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptSpec {
    pub style: PromptStyle,
    pub mode: PromptMode,
    pub demonstrations: Vec<Shot>,
    pub target_log: String,
}

impl PromptSpec {
    pub fn new(
        style: PromptStyle,
        mode: PromptMode,
        demonstrations: Vec<Shot>,
        target_log: impl Into<String>,
    ) -> Result<Self, PromptError> {
        match mode {
            PromptMode::FineTune if !demonstrations.is_empty() => {
                return Err(PromptError::UnexpectedDemonstrations)
            }
            PromptMode::Icl if demonstrations.is_empty() => {
                return Err(PromptError::EmptyDemonstrations)
            }
            _ => {}
        }
        let target_log = target_log.into();
        check_log(&target_log)?;
        Ok(Self {
            style,
            mode,
            demonstrations,
            target_log,
        })
    }

    pub fn render(&self) -> Result<PromptText, PromptError> {
        match self.mode {
            PromptMode::FineTune => build_prompt(self.style, &self.target_log, None),
            PromptMode::Icl => build_icl_prompt(self.style, &self.demonstrations, &self.target_log),
        }
    }
}

/// Pulls the template out of a generated completion.
///
/// For Alpaca the text after the last `### Response:` is used (the whole
/// completion when the marker is absent). The answer is then cut at its
/// first line break, trimmed, and one surrounding pair of single quotes is
/// removed.
pub fn extract_template(style: PromptStyle, completion: &str) -> Result<String, PromptError> {
    let region = match style {
        PromptStyle::T5 => completion,
        PromptStyle::Alpaca => match completion.rfind(RESPONSE_MARKER) {
            Some(at) => &completion[at + RESPONSE_MARKER.len()..],
            None => completion,
        },
    };
    let region = region.trim_start();
    let line = region.split('\n').next().unwrap_or("").trim();
    let unquoted = match line.strip_prefix('\'').and_then(|s| s.strip_suffix('\'')) {
        Some(inner) => inner,
        None => line,
    };
    if unquoted.is_empty() {
        Err(PromptError::EmptyCompletion)
    } else {
        Ok(unquoted.into())
    }
}

/// Recovers the target log embedded in a rendered inference prompt.
///
/// Only the final (open) block is considered, so in-context prompts yield
/// their target rather than a demonstration.
pub fn embedded_target_log(prompt: &str) -> Option<&str> {
    if let Some(body) = prompt.strip_suffix(ALPACA_INPUT_CLOSE) {
        let start = body.rfind(ALPACA_INPUT_OPEN)? + ALPACA_INPUT_OPEN.len();
        return Some(&body[start..]);
    }
    let body = prompt.strip_suffix(T5_CLOSE)?;
    let open = format!("{T5_INSTRUCTION}'");
    let start = body.rfind(open.as_str())? + open.len();
    Some(&body[start..])
}

/// Style of a rendered inference prompt, judged by its final block.
pub fn detect_style(prompt: &str) -> Option<PromptStyle> {
    if prompt.ends_with(ALPACA_INPUT_CLOSE) {
        Some(PromptStyle::Alpaca)
    } else if prompt.ends_with(T5_CLOSE) && prompt.contains(T5_INSTRUCTION) {
        Some(PromptStyle::T5)
    } else {
        None
    }
}
