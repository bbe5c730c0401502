#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use llmparser_core::Corpus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Planted template family `t`: fixed words plus numeric variable slots.
pub fn planted_template(t: usize) -> String {
    let words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet"];
    let w = words[t % words.len()];
    match t % 4 {
        0 => format!("{w} service started on port <*>"),
        1 => format!("{w} request <*> completed in <*> ms"),
        2 => format!("{w} cache flushed"),
        _ => format!("{w} user <*> logged out after <*> seconds from <*>"),
    }
}

fn instantiate(template: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut parts = template.split("<*>").peekable();
    while let Some(p) = parts.next() {
        out.push_str(p);
        if parts.peek().is_some() {
            write!(out, "{}", rng.random_range(0..100_000u32)).unwrap();
        }
    }
    out
}

/// `n` logs drawn from `n_templates` planted templates, every template used at least once.
pub fn synthetic_pairs(n: usize, n_templates: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = if i < n_templates { i } else { rng.random_range(0..n_templates) };
            let template = planted_template(t);
            (instantiate(&template, &mut rng), template)
        })
        .collect()
}

pub fn synthetic_corpus(system: &str, n: usize, n_templates: usize, seed: u64) -> Corpus {
    Corpus::from_pairs(system, "synthetic", synthetic_pairs(n, n_templates, seed)).unwrap()
}

/// Writes a benchmark-shaped structured CSV.
pub fn write_dataset_csv(path: &Path, pairs: &[(String, String)]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["LineId", "Level", "Content", "EventId", "EventTemplate"]).unwrap();
    for (i, (log, tpl)) in pairs.iter().enumerate() {
        w.write_record([&(i + 1).to_string(), "INFO", log, "E1", tpl]).unwrap();
    }
    w.flush().unwrap();
}

pub fn dataset_in(dir: &Path, name: &str, pairs: &[(String, String)]) -> PathBuf {
    let path = dir.join(name);
    write_dataset_csv(&path, pairs);
    path
}

/// Seven Spark logs with known grouping: parsed groups {1,2},{3},{4},{5},{6,7};
/// truth groups {1,2},{3},{4},{5,6,7}; logs 3, 4, 6 and 7 mis-parsed.
pub fn spark_example() -> (Vec<(String, String)>, Vec<String>) {
    let rows = [
        ("Got assigned task 0", "Got assigned task <*>", "Got assigned task <*>"),
        ("Got assigned task 1", "Got assigned task <*>", "Got assigned task <*>"),
        (
            "Running task 0.0 in stage 1.0 (TID 0)",
            "Running task <*> in stage <*> (TID <*>)",
            "Running task <*> in stage 1.0 (TID <*>)",
        ),
        (
            "Starting executor ID 4 on host mesos-slave-07",
            "Starting executor ID <*> on host <*>",
            "Starting executor ID <*> on host mesos-slave-<*>",
        ),
        ("Finished task 0.0 in stage 1.0 (TID 0)", "Finished task <*> in stage <*> (TID <*>)", "Finished task <*> in stage <*> (TID <*>)"),
        ("Finished task 1.0 in stage 1.0 (TID 1)", "Finished task <*> in stage <*> (TID <*>)", "Finished task <*> in stage 1.0 (TID <*>)"),
        ("Finished task 2.0 in stage 1.0 (TID 2)", "Finished task <*> in stage <*> (TID <*>)", "Finished task <*> in stage 1.0 (TID <*>)"),
    ];
    let pairs = rows.iter().map(|(l, t, _)| (l.to_string(), t.to_string())).collect();
    let parsed = rows.iter().map(|(_, _, p)| p.to_string()).collect();
    (pairs, parsed)
}
