//! Evaluation report files and the per-system summary table.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use llmparser_core::evaluate::{paired_t_test, EvalError, TTest};
use llmparser_core::EvalReport;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot access report: {0}")]
    Io(#[from] io::Error),
    #[error("report is not valid: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report schema mismatch: {0}")]
    Schema(String),
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<EvalReport, ReportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Markdown,
    Text,
}

/// Outcome of comparing two report sets system by system.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub ga: Result<TTest, EvalError>,
    pub pa: Result<TTest, EvalError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub header: Vec<String>,
    /// One row per system followed by the `Average` row.
    pub rows: Vec<Vec<String>>,
    pub comparison: Option<Comparison>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn fmt_metric(v: f64) -> String {
    format!("{v:.4}")
}

fn check_unique(reports: &[EvalReport], label: &str) -> Result<(), ReportError> {
    let mut seen = BTreeSet::new();
    for r in reports {
        if !seen.insert(r.system.as_str()) {
            return Err(ReportError::Schema(format!("system `{}` appears twice in {label}", r.system)));
        }
    }
    Ok(())
}

/// Builds the GA/PA table, averaging systems with equal weight.
///
/// With `compare`, both sets must cover the same systems; rows follow the
/// order of `reports` and paired t-tests run on GA and PA.
pub fn summary_table(reports: &[EvalReport], compare: Option<&[EvalReport]>) -> Result<SummaryTable, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Schema("no reports given".into()));
    }
    check_unique(reports, "the first report set")?;
    let paired: Option<Vec<&EvalReport>> = match compare {
        None => None,
        Some(other) => {
            check_unique(other, "the comparison set")?;
            let left: BTreeSet<&str> = reports.iter().map(|r| r.system.as_str()).collect();
            let right: BTreeSet<&str> = other.iter().map(|r| r.system.as_str()).collect();
            if left != right {
                let diff: Vec<&str> = left.symmetric_difference(&right).copied().collect();
                return Err(ReportError::Schema(format!(
                    "report sets cover different systems: {}",
                    diff.join(", ")
                )));
            }
            Some(
                reports
                    .iter()
                    .map(|r| other.iter().find(|o| o.system == r.system).expect("same system sets"))
                    .collect(),
            )
        }
    };

    let mut header = vec!["System".to_string(), "GA".to_string(), "PA".to_string()];
    if paired.is_some() {
        header = ["System", "GA (A)", "PA (A)", "GA (B)", "PA (B)"].map(String::from).to_vec();
    }
    let mut rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![r.system.clone(), fmt_metric(r.ga), fmt_metric(r.pa)];
            if let Some(p) = &paired {
                row.push(fmt_metric(p[i].ga));
                row.push(fmt_metric(p[i].pa));
            }
            row
        })
        .collect();
    let mut avg = vec![
        "Average".to_string(),
        fmt_metric(mean(reports.iter().map(|r| r.ga))),
        fmt_metric(mean(reports.iter().map(|r| r.pa))),
    ];
    let comparison = paired.map(|p| {
        avg.push(fmt_metric(mean(p.iter().map(|r| r.ga))));
        avg.push(fmt_metric(mean(p.iter().map(|r| r.pa))));
        let a_ga: Vec<f64> = reports.iter().map(|r| r.ga).collect();
        let a_pa: Vec<f64> = reports.iter().map(|r| r.pa).collect();
        let b_ga: Vec<f64> = p.iter().map(|r| r.ga).collect();
        let b_pa: Vec<f64> = p.iter().map(|r| r.pa).collect();
        Comparison {
            ga: paired_t_test(&a_ga, &b_ga),
            pa: paired_t_test(&a_pa, &b_pa),
        }
    });
    rows.push(avg);
    Ok(SummaryTable {
        header,
        rows,
        comparison,
    })
}

fn describe_test(name: &str, test: &Result<TTest, EvalError>) -> String {
    match test {
        Ok(t) => format!("paired t-test {name} (A - B): t = {:.4}, df = {}, p = {:.6}", t.t, t.df, t.p),
        Err(e) => format!("paired t-test {name} (A - B): not applicable ({e})"),
    }
}

impl SummaryTable {
    pub fn render(&self, format: TableFormat) -> String {
        let mut out = String::new();
        match format {
            TableFormat::Markdown => {
                let _ = writeln!(out, "| {} |", self.header.join(" | "));
                let rule: Vec<&str> = self
                    .header
                    .iter()
                    .enumerate()
                    .map(|(i, _)| if i == 0 { "---" } else { "---:" })
                    .collect();
                let _ = writeln!(out, "| {} |", rule.join(" | "));
                for row in &self.rows {
                    let _ = writeln!(out, "| {} |", row.join(" | "));
                }
            }
            TableFormat::Text => {
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|c| {
                        self.rows
                            .iter()
                            .map(|r| r[c].len())
                            .chain(std::iter::once(self.header[c].len()))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .enumerate()
                        .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let _ = writeln!(out, "{}", line(&self.header));
                let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
                for row in &self.rows {
                    let _ = writeln!(out, "{}", line(row));
                }
            }
        }
        if let Some(c) = &self.comparison {
            let _ = writeln!(out);
            let _ = writeln!(out, "{}", describe_test("GA", &c.ga));
            let _ = writeln!(out, "{}", describe_test("PA", &c.pa));
        }
        out
    }
}
