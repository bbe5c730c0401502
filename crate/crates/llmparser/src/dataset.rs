//! Benchmark dataset loading.
//!
//! Datasets are the structured CSVs shipped with the log parsing benchmark:
//! a header row plus one row per log, with the message in `Content` and the
//! label in `EventTemplate`. Other columns are ignored.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use llmparser_core::{Corpus, CorpusError};

pub const CONTENT_COLUMN: &str = "Content";
pub const TEMPLATE_COLUMN: &str = "EventTemplate";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DatasetFormat {
    #[default]
    StructuredCsv,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Corpus { path: String, source: CorpusError },
}

impl DatasetError {
    pub fn corpus_error(&self) -> Option<&CorpusError> {
        match self {
            DatasetError::Corpus { source, .. } => Some(source),
            DatasetError::Io { .. } => None,
        }
    }
}

/// System name derived from a benchmark file name.
///
/// `Apache_2k.log_structured_corrected.csv` and `Apache.csv` both give
/// `Apache`.
pub fn system_name_from_path(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("dataset");
    let end = name.find(['_', '.']).unwrap_or(name.len());
    if end == 0 {
        name.to_string()
    } else {
        name[..end].to_string()
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Corpus, DatasetError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: display.clone(),
        source,
    })?;
    match format {
        DatasetFormat::StructuredCsv => {
            read_structured_csv(file, &system_name_from_path(path), &display).map_err(|source| {
                DatasetError::Corpus {
                    path: display,
                    source,
                }
            })
        }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CorpusError> {
    headers
        .iter()
        .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
        .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
}

/// Reads a structured CSV from any reader.
pub fn read_structured_csv<R: Read>(reader: R, system: &str, source: &str) -> Result<Corpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::MalformedRow {
            row: 0,
            reason: e.to_string(),
        })?
        .clone();
    let content = column(&headers, CONTENT_COLUMN)?;
    let template = column(&headers, TEMPLATE_COLUMN)?;

    let mut pairs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CorpusError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let field = |col: usize, name: &str| {
            record.get(col).map(str::to_string).ok_or_else(|| CorpusError::MalformedRow {
                row,
                reason: format!("missing `{name}` field"),
            })
        };
        pairs.push((field(content, CONTENT_COLUMN)?, field(template, TEMPLATE_COLUMN)?));
    }
    Corpus::from_pairs(system, source, pairs)
}
