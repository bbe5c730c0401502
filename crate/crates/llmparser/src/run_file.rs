//! Parse runs as CSV: `index,content,parsed_template,latency_ms,attempts`.
//!
//! A failed parse is written with an empty `parsed_template`; the failure
//! reason goes to the run manifest.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use llmparser_core::{Corpus, ParseEntry, ParseRun};
use serde::{Deserialize, Serialize};

pub const HEADER: [&str; 5] = ["index", "content", "parsed_template", "latency_ms", "attempts"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedRow {
    pub index: usize,
    pub content: String,
    pub parsed_template: String,
    pub latency_ms: f64,
    pub attempts: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum RunFileError {
    #[error("cannot access parse run: {0}")]
    Io(#[from] io::Error),
    #[error("parse run CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse run does not match the dataset: {0}")]
    Misaligned(String),
}

pub fn write_parse_run<W: Write>(w: W, run: &ParseRun, corpus: &Corpus) -> Result<(), RunFileError> {
    if run.entries.len() != corpus.len() {
        return Err(RunFileError::Misaligned(format!(
            "{} entries for {} records",
            run.entries.len(),
            corpus.len()
        )));
    }
    let mut wtr = csv::Writer::from_writer(w);
    for (e, r) in run.entries.iter().zip(corpus.iter()) {
        wtr.serialize(ParsedRow {
            index: e.index,
            content: r.content.clone(),
            parsed_template: e.parsed_template.clone(),
            latency_ms: (e.latency_secs * 1e6).round() / 1e3,
            attempts: e.attempts,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_parse_rows<R: Read>(r: R) -> Result<Vec<ParsedRow>, RunFileError> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(HEADER) {
        return Err(RunFileError::Misaligned(format!("expected columns {}", HEADER.join(","))));
    }
    let rows = rdr.deserialize().collect::<Result<Vec<ParsedRow>, _>>()?;
    Ok(rows)
}

/// Checks rows against the dataset and turns them into run entries.
///
/// Rows must be ordered by index and carry the dataset's content verbatim.
pub fn rows_to_entries(rows: &[ParsedRow], corpus: &Corpus) -> Result<Vec<ParseEntry>, RunFileError> {
    if rows.len() != corpus.len() {
        return Err(RunFileError::Misaligned(format!(
            "{} parsed rows for {} dataset records",
            rows.len(),
            corpus.len()
        )));
    }
    rows.iter()
        .zip(corpus.iter())
        .map(|(row, rec)| {
            if row.index != rec.index {
                return Err(RunFileError::Misaligned(format!(
                    "row for record {} carries index {}",
                    rec.index, row.index
                )));
            }
            if row.content.trim() != rec.content {
                return Err(RunFileError::Misaligned(format!("content of record {} differs", rec.index)));
            }
            let latency = row.latency_ms / 1e3;
            Ok(if row.parsed_template.trim().is_empty() {
                ParseEntry::failed(row.index, "no template".into(), latency, row.attempts)
            } else {
                ParseEntry::succeeded(row.index, row.parsed_template.clone(), latency, row.attempts)
            })
        })
        .collect()
}

pub fn save_parse_run(path: &Path, run: &ParseRun, corpus: &Corpus) -> Result<(), RunFileError> {
    write_parse_run(io::BufWriter::new(File::create(path)?), run, corpus)
}

pub fn load_parse_rows(path: &Path) -> Result<Vec<ParsedRow>, RunFileError> {
    read_parse_rows(File::open(path)?)
}
