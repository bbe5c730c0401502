use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hasher;

use fnv::FnvHasher;

use crate::preprocess::MaskedLog;

pub const DEFAULT_FEATURE_DIM: usize = 256;

/// Dense row-major matrix of clustering features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Wraps `data` as a `rows × dim` matrix.
    ///
    /// # Panics
    ///
    /// If `data.len() != rows * dim`.
    pub fn from_vec(rows: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * dim, "feature buffer does not match shape");
        Self { rows, dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "ragged feature rows");
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }
}

fn token_bucket(token: &str, dim: usize) -> usize {
    let mut h = FnvHasher::default();
    h.write(token.as_bytes());
    (h.finish() % dim as u64) as usize
}

/// Hashed bag-of-tokens features, one L2-normalised row per log.
///
/// Tokens are whitespace-separated and hashed with FNV-1a into
/// `[0, feature_dim)`. A log without tokens maps to the zero row.
pub fn vectorize(masked_logs: &[MaskedLog], feature_dim: usize) -> FeatureMatrix {
    let dim = feature_dim.max(1);
    let mut data = vec![0.0; masked_logs.len() * dim];
    for (i, log) in masked_logs.iter().enumerate() {
        let row = &mut data[i * dim..(i + 1) * dim];
        for token in log.masked.split_whitespace() {
            row[token_bucket(token, dim)] += 1.0;
        }
        let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    FeatureMatrix::from_vec(masked_logs.len(), dim, data)
}
