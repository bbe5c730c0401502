//! Core algorithms for LLM-based log parsing.
//!
//! Everything in this crate is pure computation over in-memory data and
//! builds without `std` (an allocator is required). File formats, the HTTP
//! generation client and the command-line driver live in the `llmparser`
//! crate.
//!
//! The pipeline is:
//!
//! 1. [`corpus`] holds labelled benchmark logs.
//! 2. [`preprocess`] strips framework headers and masks numbers.
//! 3. [`sampler`] clusters the masked logs with flat-kernel Mean Shift and
//!    draws few-shot examples cluster by cluster, largest first.
//! 4. [`prompt`] renders T5 and Alpaca style prompts and extracts templates
//!    from completions.
//! 5. [`evaluate`] scores a [`run::ParseRun`] with Grouping Accuracy and
//!    Parsing Accuracy, plus seen/unseen and duplicate-excluded breakdowns.
#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod evaluate;
pub mod preprocess;
pub mod prompt;
pub mod run;
pub mod sampler;

pub use corpus::{assemble_cross_system, Corpus, CorpusError, LogRecord};
pub use evaluate::{
    build_report, build_report_from_entries, eval_excluding_training, group_accuracy, paired_t_test, parsing_accuracy,
    split_seen_unseen, EvalError, EvalReport,
};
pub use preprocess::{extract_content, mask_numbers, preprocess_corpus, HeaderPattern, MaskedLog};
pub use prompt::{
    build_alpaca_prompt, build_icl_prompt, build_t5_prompt, extract_template, PromptMode,
    PromptSpec, PromptStyle, PromptText,
};
pub use run::{GenerationSettings, ParseEntry, ParseRun};
pub use sampler::{sample_shots, Cluster, SamplerConfig, Shot, ShotSet};
