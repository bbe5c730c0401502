//! Parser evaluation.
//!
//! Grouping Accuracy (GA) asks whether each log lands in the same group as
//! the ground truth puts it; Parsing Accuracy (PA) asks whether its template
//! string matches. Both use whitespace-insensitive template equality.
//!
//! On top of the two metrics this module splits logs into seen and unseen
//! templates relative to a shot set, re-scores after removing logs identical
//! to training shots, and runs paired t-tests across systems.

mod metrics;
mod stats;

pub use metrics::{
    group_accuracy, group_correctness, normalize_template, parse_correctness, parsing_accuracy,
    templates_match,
};
pub use stats::{paired_t_test, regularized_incomplete_beta, student_t_cdf, two_sided_p, TTest};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::run::{ParseEntry, ParseRun};
use crate::sampler::ShotSet;
use metrics::{count, ratio};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {parsed} parsed vs {truth} truth")]
    LengthMismatch { parsed: usize, truth: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("shot template `{0}` does not occur in the corpus")]
    ShotNotInCorpus(String),
    #[error("every log was excluded")]
    AllExcluded,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("parse run does not line up with the corpus: {0}")]
    Misaligned(String),
}

/// Records partitioned by whether their template appears among the shots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeenSplit {
    pub seen: Vec<usize>,
    pub unseen: Vec<usize>,
    pub unseen_templates: BTreeSet<String>,
}

pub fn split_seen_unseen(corpus: &Corpus, shots: &ShotSet) -> Result<SeenSplit, EvalError> {
    let corpus_templates: BTreeSet<&str> = corpus.iter().map(|r| r.truth_template.as_str()).collect();
    let mut seen_templates: BTreeSet<&str> = BTreeSet::new();
    for shot in &shots.shots {
        if !corpus_templates.contains(shot.template.as_str()) {
            return Err(EvalError::ShotNotInCorpus(shot.template.clone()));
        }
        seen_templates.insert(shot.template.as_str());
    }
    let mut split = SeenSplit {
        seen: Vec::new(),
        unseen: Vec::new(),
        unseen_templates: BTreeSet::new(),
    };
    for r in corpus {
        if seen_templates.contains(r.truth_template.as_str()) {
            split.seen.push(r.index);
        } else {
            split.unseen.push(r.index);
            split.unseen_templates.insert(r.truth_template.clone());
        }
    }
    Ok(split)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExclusionMetrics {
    pub ga_excl: f64,
    pub pa_excl: f64,
    pub n_excluded: usize,
}

/// Indices of records whose content is byte-identical to some shot's log.
pub fn training_duplicates(corpus: &Corpus, shots: &ShotSet) -> BTreeSet<usize> {
    let logs: BTreeSet<&str> = shots.shots.iter().map(|s| s.log.as_str()).collect();
    corpus
        .iter()
        .filter(|r| logs.contains(r.content.as_str()))
        .map(|r| r.index)
        .collect()
}

fn excluded_metrics(
    parsed: &[Option<&str>],
    truth: &[&str],
    drop: &BTreeSet<usize>,
) -> Result<ExclusionMetrics, EvalError> {
    let keep: Vec<usize> = (0..truth.len()).filter(|i| !drop.contains(i)).collect();
    if keep.is_empty() {
        return Err(EvalError::AllExcluded);
    }
    let p: Vec<Option<&str>> = keep.iter().map(|&i| parsed[i]).collect();
    let t: Vec<&str> = keep.iter().map(|&i| truth[i]).collect();
    Ok(ExclusionMetrics {
        ga_excl: ratio(&group_correctness(&p, &t)),
        pa_excl: ratio(&parse_correctness(&p, &t)),
        n_excluded: drop.len(),
    })
}

/// GA and PA after removing every log identical to a training shot.
///
/// Grouping is recomputed on the remaining logs only.
pub fn eval_excluding_training<P: AsRef<str>, T: AsRef<str>>(
    parsed: &[P],
    truth: &[T],
    corpus: &Corpus,
    shots: &ShotSet,
) -> Result<ExclusionMetrics, EvalError> {
    if parsed.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            parsed: parsed.len(),
            truth: truth.len(),
        });
    }
    if truth.len() != corpus.len() {
        return Err(EvalError::Misaligned("truth list and corpus differ in length".into()));
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let parsed: Vec<Option<&str>> = parsed.iter().map(|p| Some(p.as_ref())).collect();
    let truth: Vec<&str> = truth.iter().map(AsRef::as_ref).collect();
    excluded_metrics(&parsed, &truth, &training_duplicates(corpus, shots))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateErrors {
    pub template: String,
    pub errors: usize,
}

/// Evaluation of one parse run against its corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub n_logs: usize,
    pub ga: f64,
    pub pa: f64,
    pub ga_correct: usize,
    pub pa_correct: usize,
    pub n_failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa_seen: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_seen_logs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa_unseen: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_unseen_logs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_unseen_templates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga_excl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa_excl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_excluded: Option<usize>,
    /// Ground-truth templates with at least one mis-parsed log, most errors first.
    pub per_template_errors: Vec<TemplateErrors>,
}

fn check_alignment(entries: &[ParseEntry], corpus: &Corpus) -> Result<(), EvalError> {
    if entries.len() != corpus.len() {
        return Err(EvalError::Misaligned(alloc::format!(
            "{} entries for {} records",
            entries.len(),
            corpus.len()
        )));
    }
    if let Some((pos, e)) = entries.iter().enumerate().find(|(i, e)| e.index != *i) {
        return Err(EvalError::Misaligned(alloc::format!(
            "entry {pos} carries index {}",
            e.index
        )));
    }
    Ok(())
}

/// Scores a parse run. Failed parses count as wrong for both metrics.
///
/// With `shots`, the seen/unseen and duplicate-excluded sections are filled
/// in. `pa_seen`/`pa_unseen` stay `None` when their partition is empty, and
/// the excluded section stays empty when every log matches a shot.
pub fn build_report(
    run: &ParseRun,
    corpus: &Corpus,
    shots: Option<&ShotSet>,
) -> Result<EvalReport, EvalError> {
    build_report_from_entries(&run.entries, corpus, shots)
}

/// [`build_report`] over bare entries, for runs reloaded from disk.
pub fn build_report_from_entries(
    entries: &[ParseEntry],
    corpus: &Corpus,
    shots: Option<&ShotSet>,
) -> Result<EvalReport, EvalError> {
    check_alignment(entries, corpus)?;
    let parsed: Vec<Option<&str>> = entries.iter().map(ParseEntry::template).collect();
    let truth = corpus.truth_templates();
    let pa_flags = parse_correctness(&parsed, &truth);
    let ga_flags = group_correctness(&parsed, &truth);

    let mut errors: BTreeMap<&str, usize> = BTreeMap::new();
    for (ok, t) in pa_flags.iter().zip(&truth) {
        if !ok {
            *errors.entry(t).or_default() += 1;
        }
    }
    let mut per_template_errors: Vec<TemplateErrors> = errors
        .into_iter()
        .map(|(t, n)| TemplateErrors {
            template: t.into(),
            errors: n,
        })
        .collect();
    // stable sort keeps templates alphabetical within equal counts
    per_template_errors.sort_by_key(|e| core::cmp::Reverse(e.errors));

    let mut report = EvalReport {
        system: corpus.system_name().into(),
        n_logs: corpus.len(),
        ga: ratio(&ga_flags),
        pa: ratio(&pa_flags),
        ga_correct: count(&ga_flags),
        pa_correct: count(&pa_flags),
        n_failed: entries.iter().filter(|e| e.is_failed()).count(),
        pa_seen: None,
        n_seen_logs: None,
        pa_unseen: None,
        n_unseen_logs: None,
        n_unseen_templates: None,
        ga_excl: None,
        pa_excl: None,
        n_excluded: None,
        per_template_errors,
    };

    if let Some(shots) = shots {
        let split = split_seen_unseen(corpus, shots)?;
        let subset_pa = |idx: &[usize]| {
            (!idx.is_empty()).then(|| {
                idx.iter().filter(|&&i| pa_flags[i]).count() as f64 / idx.len() as f64
            })
        };
        report.pa_seen = subset_pa(&split.seen);
        report.n_seen_logs = Some(split.seen.len());
        report.pa_unseen = subset_pa(&split.unseen);
        report.n_unseen_logs = Some(split.unseen.len());
        report.n_unseen_templates = Some(split.unseen_templates.len());

        let drop = training_duplicates(corpus, shots);
        report.n_excluded = Some(drop.len());
        match excluded_metrics(&parsed, &truth, &drop) {
            Ok(m) => {
                report.ga_excl = Some(m.ga_excl);
                report.pa_excl = Some(m.pa_excl);
            }
            Err(EvalError::AllExcluded) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}
