use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::EvalError;

/// Collapses whitespace runs to one space and trims the ends.
pub fn normalize_template(template: &str) -> String {
    let mut out = String::with_capacity(template.len());
    for (i, word) in template.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Template equality used by both metrics: whitespace-insensitive, exact
/// otherwise.
pub fn templates_match(a: &str, b: &str) -> bool {
    a.split_whitespace().eq(b.split_whitespace())
}

fn check_lengths(parsed: usize, truth: usize) -> Result<(), EvalError> {
    if parsed != truth {
        return Err(EvalError::LengthMismatch { parsed, truth });
    }
    if parsed == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

/// Per-log parsing correctness. Failed parses (`None`) are incorrect.
pub fn parse_correctness(parsed: &[Option<&str>], truth: &[&str]) -> Vec<bool> {
    parsed
        .iter()
        .zip(truth)
        .map(|(p, t)| p.is_some_and(|p| templates_match(p, t)))
        .collect()
}

/// Per-log grouping correctness.
///
/// Log `i` is correct when the set of logs sharing its parsed template equals
/// the set sharing its ground-truth template. A parsed group is either
/// entirely correct or entirely wrong, so the check runs once per group.
/// Failed parses (`None`) are incorrect and group with nothing.
pub fn group_correctness(parsed: &[Option<&str>], truth: &[&str]) -> Vec<bool> {
    let mut truth_id: BTreeMap<String, usize> = BTreeMap::new();
    let mut truth_size: Vec<usize> = Vec::new();
    let truth_of: Vec<usize> = truth
        .iter()
        .map(|t| {
            let next = truth_size.len();
            let id = *truth_id.entry(normalize_template(t)).or_insert(next);
            if id == next {
                truth_size.push(0);
            }
            truth_size[id] += 1;
            id
        })
        .collect();

    let mut parsed_groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, p) in parsed.iter().enumerate() {
        if let Some(p) = p {
            parsed_groups.entry(normalize_template(p)).or_default().push(i);
        }
    }

    let mut correct = vec![false; parsed.len()];
    for members in parsed_groups.values() {
        let t = truth_of[members[0]];
        if members.iter().all(|&i| truth_of[i] == t) && truth_size[t] == members.len() {
            members.iter().for_each(|&i| correct[i] = true);
        }
    }
    correct
}

/// Fraction of logs whose parsed template matches the ground truth.
pub fn parsing_accuracy<P: AsRef<str>, T: AsRef<str>>(parsed: &[P], truth: &[T]) -> Result<f64, EvalError> {
    check_lengths(parsed.len(), truth.len())?;
    let parsed: Vec<Option<&str>> = parsed.iter().map(|p| Some(p.as_ref())).collect();
    let truth: Vec<&str> = truth.iter().map(AsRef::as_ref).collect();
    Ok(ratio(&parse_correctness(&parsed, &truth)))
}

/// Fraction of logs grouped exactly as the ground truth groups them.
pub fn group_accuracy<P: AsRef<str>, T: AsRef<str>>(parsed: &[P], truth: &[T]) -> Result<f64, EvalError> {
    check_lengths(parsed.len(), truth.len())?;
    let parsed: Vec<Option<&str>> = parsed.iter().map(|p| Some(p.as_ref())).collect();
    let truth: Vec<&str> = truth.iter().map(AsRef::as_ref).collect();
    Ok(ratio(&group_correctness(&parsed, &truth)))
}

pub(crate) fn count(flags: &[bool]) -> usize {
    flags.iter().filter(|&&c| c).count()
}

pub(crate) fn ratio(flags: &[bool]) -> f64 {
    count(flags) as f64 / flags.len() as f64
}
