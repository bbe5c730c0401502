//! Log normalisation ahead of clustering.
//!
//! Masking only feeds the clustering step. Prompts and inference always see
//! the original record content.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use regex_automata::meta::Regex;
use regex_automata::{Anchored, Input};

use crate::corpus::Corpus;

/// Replacement for every run of decimal digits.
pub const MASK_CHAR: char = '#';

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PreprocessError {
    #[error("invalid header pattern: {0}")]
    InvalidPattern(String),
    #[error("corpus is empty")]
    EmptyDataset,
}

/// A compiled regular expression matching a framework-generated line prefix
/// such as `date time level `.
#[derive(Clone, Debug)]
pub struct HeaderPattern {
    source: String,
    regex: Regex,
}

impl HeaderPattern {
    pub fn new(pattern: &str) -> Result<Self, PreprocessError> {
        let regex =
            Regex::new(pattern).map_err(|e| PreprocessError::InvalidPattern(e.to_string()))?;
        Ok(Self {
            source: pattern.to_string(),
            regex,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Length in bytes of the prefix matched at the start of `line`.
    fn prefix_len(&self, line: &str) -> Option<usize> {
        let input = Input::new(line).anchored(Anchored::Yes);
        self.regex.find(input).map(|m| m.end())
    }
}

/// Removes the header prefix matched by `header` and trims the rest.
pub fn extract_content<'a>(raw: &'a str, header: Option<&HeaderPattern>) -> &'a str {
    match header.and_then(|h| h.prefix_len(raw)) {
        Some(end) => raw[end..].trim(),
        None => raw.trim(),
    }
}

/// Replaces every maximal run of ASCII digits with [`MASK_CHAR`].
pub fn mask_numbers(content: &str) -> String {
    let mut out = String::with_capacity(content.len());
    let mut in_digits = false;
    for c in content.chars() {
        if c.is_ascii_digit() {
            if !in_digits {
                out.push(MASK_CHAR);
                in_digits = true;
            }
        } else {
            out.push(c);
            in_digits = false;
        }
    }
    out
}

/// A record's content after header stripping and number masking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskedLog {
    pub original_index: usize,
    pub masked: String,
}

pub fn preprocess_corpus(
    corpus: &Corpus,
    header: Option<&HeaderPattern>,
) -> Result<Vec<MaskedLog>, PreprocessError> {
    if corpus.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }
    Ok(corpus
        .iter()
        .map(|r| MaskedLog {
            original_index: r.index,
            masked: mask_numbers(extract_content(&r.content, header)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_matched_header() {
        // date, time and level fields followed by a space
        let header =
            HeaderPattern::new(r"\d{2}/\d{2}/\d{2} \d{2}:\d{2}:\d{2} [A-Z]+ ").unwrap();
        assert_eq!(
            extract_content("17/06/09 20:10:40 INFO Got assigned task 0", Some(&header)),
            "Got assigned task 0"
        );
    }

    #[test]
    fn header_must_match_at_line_start() {
        let header = HeaderPattern::new("INFO ").unwrap();
        assert_eq!(
            extract_content("17/06/09 INFO Got assigned task 0", Some(&header)),
            "17/06/09 INFO Got assigned task 0"
        );
    }

    #[test]
    fn no_pattern_is_identity() {
        assert_eq!(extract_content("Got assigned task 0", None), "Got assigned task 0");
        assert_eq!(extract_content("  padded \n", None), "padded");
    }

    #[test]
    fn malformed_pattern() {
        assert!(matches!(HeaderPattern::new("(["), Err(PreprocessError::InvalidPattern(_))));
    }

    #[test]
    fn masking_examples() {
        assert_eq!(mask_numbers("Got assigned task 0"), "Got assigned task #");
        assert_eq!(mask_numbers("eth0 up 192.168.1.5"), "eth# up #.#.#.#");
        assert_eq!(mask_numbers("no digits here"), "no digits here");
        assert_eq!(mask_numbers("blk_-1608999687919862906"), "blk_-#");
    }

    #[test]
    fn preprocess_keeps_order() {
        let c = Corpus::from_pairs(
            "s",
            "x",
            [
                ("Got assigned task 0", "Got assigned task <*>"),
                ("Got assigned task 2", "Got assigned task <*>"),
                ("idle", "idle"),
            ],
        )
        .unwrap();
        let masked = preprocess_corpus(&c, None).unwrap();
        assert_eq!(masked.len(), 3);
        assert_eq!(masked[0].masked, "Got assigned task #");
        assert_eq!(masked[1].masked, "Got assigned task #");
        let idx: Vec<usize> = masked.iter().map(|m| m.original_index).collect();
        assert_eq!(idx, [0, 1, 2]);
    }

    #[test]
    fn preprocess_propagates_header_handling() {
        let c = Corpus::from_pairs("s", "x", [("INFO job 12 done", "job <*> done")]).unwrap();
        let header = HeaderPattern::new("[A-Z]+ ").unwrap();
        let masked = preprocess_corpus(&c, Some(&header)).unwrap();
        assert_eq!(masked[0].masked, "job # done");
    }

    proptest! {
        #[test]
        fn mask_is_idempotent(s in "\\PC*") {
            let once = mask_numbers(&s);
            prop_assert_eq!(mask_numbers(&once), once.clone());
            prop_assert!(!once.chars().any(|c| c.is_ascii_digit()));
            prop_assert!(once.len() <= s.len());
        }

        #[test]
        fn digit_variants_collapse(prefix in "[a-z ]{0,8}", a in 0u64..100_000, b in 0u64..100_000) {
            let x = alloc::format!("{prefix}{a} end");
            let y = alloc::format!("{prefix}{b} end");
            prop_assert_eq!(mask_numbers(&x), mask_numbers(&y));
        }
    }
}
