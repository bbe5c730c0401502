//! Shot sets as JSON Lines.
//!
//! The first line is a header `{"seed":..,"n":..,"system":..}`; every further
//! line is one shot `{"log":..,"template":..,"cluster_id":..,"pass":..}`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use llmparser_core::{Shot, ShotSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    seed: u64,
    n: usize,
    system: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ShotsFileError {
    #[error("cannot access shots file: {0}")]
    Io(#[from] io::Error),
    #[error("shots file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("shots file has no header line")]
    MissingHeader,
}

pub fn write_shots<W: Write>(mut w: W, shots: &ShotSet) -> io::Result<()> {
    let header = Header {
        seed: shots.seed,
        n: shots.requested_n,
        system: shots.system.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for shot in &shots.shots {
        serde_json::to_writer(&mut w, shot)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_shots<R: BufRead>(r: R) -> Result<ShotSet, ShotsFileError> {
    let mut header: Option<Header> = None;
    let mut shots = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |e: serde_json::Error| ShotsFileError::Malformed {
            line: i + 1,
            reason: e.to_string(),
        };
        if header.is_none() {
            header = Some(serde_json::from_str(&line).map_err(malformed)?);
        } else {
            shots.push(serde_json::from_str::<Shot>(&line).map_err(malformed)?);
        }
    }
    let header = header.ok_or(ShotsFileError::MissingHeader)?;
    Ok(ShotSet {
        system: header.system,
        seed: header.seed,
        requested_n: header.n,
        shots,
    })
}

pub fn save_shots(path: &Path, shots: &ShotSet) -> io::Result<()> {
    write_shots(BufWriter::new(File::create(path)?), shots)
}

pub fn load_shots(path: &Path) -> Result<ShotSet, ShotsFileError> {
    read_shots(BufReader::new(File::open(path)?))
}
