//! Labelled benchmark logs.
//!
//! A [`Corpus`] is the per-system dataset: every record carries the log
//! message (header already removed) and its ground-truth template. Records
//! are indexed contiguously from zero in file order and the corpus is
//! immutable once built.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One labelled log line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogRecord {
    pub index: usize,
    pub content: String,
    pub truth_template: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("dataset contains no data rows")]
    EmptyDataset,
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("no corpus named `{0}`")]
    TargetNotFound(String),
}

/// The logs of one system, in file order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    system_name: String,
    source_path: String,
    records: Vec<LogRecord>,
}

impl Corpus {
    /// Builds a corpus from `(content, template)` pairs in order.
    ///
    /// Both fields are trimmed of surrounding whitespace and must be
    /// non-empty afterwards. Rows are numbered from 1 in errors.
    pub fn from_pairs<I, C, T>(
        system_name: impl Into<String>,
        source_path: impl Into<String>,
        pairs: I,
    ) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (C, T)>,
        C: AsRef<str>,
        T: AsRef<str>,
    {
        let mut records = Vec::new();
        for (index, (content, template)) in pairs.into_iter().enumerate() {
            let content = content.as_ref().trim();
            let template = template.as_ref().trim();
            if content.is_empty() {
                return Err(CorpusError::MalformedRow {
                    row: index + 1,
                    reason: "empty `Content`".to_string(),
                });
            }
            if template.is_empty() {
                return Err(CorpusError::MalformedRow {
                    row: index + 1,
                    reason: "empty `EventTemplate`".to_string(),
                });
            }
            records.push(LogRecord {
                index,
                content: content.to_string(),
                truth_template: template.to_string(),
            });
        }
        if records.is_empty() {
            return Err(CorpusError::EmptyDataset);
        }
        Ok(Self {
            system_name: system_name.into(),
            source_path: source_path.into(),
            records,
        })
    }

    pub fn system_name(&self) -> &str {
        &self.system_name
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn get(&self, index: usize) -> Option<&LogRecord> {
        self.records.get(index)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, LogRecord> {
        self.records.iter()
    }

    /// Ground-truth templates in record order.
    pub fn truth_templates(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.truth_template.as_str()).collect()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a LogRecord;
    type IntoIter = core::slice::Iter<'a, LogRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Concatenates every corpus except `target` into one training corpus.
///
/// Records keep input-list order, then per-corpus order, and are re-indexed
/// from zero. The result is named `all-except-<target>`.
pub fn assemble_cross_system(corpora: &[Corpus], target: &str) -> Result<Corpus, CorpusError> {
    if !corpora.iter().any(|c| c.system_name == target) {
        return Err(CorpusError::TargetNotFound(target.to_string()));
    }
    let records: Vec<LogRecord> = corpora
        .iter()
        .filter(|c| c.system_name != target)
        .flat_map(|c| c.records.iter())
        .enumerate()
        .map(|(index, r)| LogRecord {
            index,
            content: r.content.clone(),
            truth_template: r.truth_template.clone(),
        })
        .collect();
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let sources: Vec<&str> = corpora
        .iter()
        .filter(|c| c.system_name != target)
        .map(|c| c.source_path.as_str())
        .collect();
    Ok(Corpus {
        system_name: format!("all-except-{target}"),
        source_path: sources.join(";"),
        records,
    })
}
