//! Unsupervised few-shot sampling.
//!
//! Logs are masked, embedded as hashed token bags and clustered with Mean
//! Shift. Clusters are then visited largest first (ties by cluster id), one
//! previously unsampled log per cluster per pass, until `n_shots` logs are
//! collected. Each sampled log is labelled with its ground-truth template.

mod mean_shift;
mod vectorize;

pub use mean_shift::{estimate_bandwidth, mean_shift, MeanShift, MeanShiftFit};
pub use vectorize::{vectorize, FeatureMatrix, DEFAULT_FEATURE_DIM};

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::preprocess::{preprocess_corpus, HeaderPattern, PreprocessError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("no features to cluster")]
    EmptyInput,
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("invalid sampler config: {0}")]
    InvalidConfig(&'static str),
}

/// A group of logs sharing a Mean Shift mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub cluster_id: usize,
    /// Ascending record indices.
    pub member_indices: Vec<usize>,
    pub size: usize,
}

impl Cluster {
    pub fn new(cluster_id: usize, member_indices: Vec<usize>) -> Self {
        let size = member_indices.len();
        Self {
            cluster_id,
            member_indices,
            size,
        }
    }
}

/// One labelled training example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    pub log: String,
    pub template: String,
    pub cluster_id: usize,
    #[serde(rename = "pass")]
    pub pass_number: usize,
    /// Source record; not part of the shots file.
    #[serde(skip)]
    pub record_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotSet {
    pub system: String,
    pub seed: u64,
    pub requested_n: usize,
    pub shots: Vec<Shot>,
}

impl ShotSet {
    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    /// Number of sampling passes used.
    pub fn passes(&self) -> usize {
        self.shots.iter().map(|s| s.pass_number).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub n_shots: usize,
    pub seed: u64,
    pub bandwidth: Option<f64>,
    pub feature_dim: usize,
}

impl SamplerConfig {
    pub fn new(n_shots: usize, seed: u64) -> Self {
        Self {
            n_shots,
            seed,
            bandwidth: None,
            feature_dim: DEFAULT_FEATURE_DIM,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_shots == 0 {
            return Err(SamplerError::InvalidConfig("n_shots must be at least 1"));
        }
        if self.feature_dim == 0 {
            return Err(SamplerError::InvalidConfig("feature_dim must be at least 1"));
        }
        if let Some(bw) = self.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(SamplerError::InvalidBandwidth(bw));
            }
        }
        Ok(())
    }
}

/// A sampled record and where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub record_index: usize,
    pub cluster_id: usize,
    pub pass_number: usize,
}

/// Everything [`sample_shots_detailed`] computed on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub shots: ShotSet,
    pub clusters: Vec<Cluster>,
    pub bandwidth: Option<f64>,
}

/// Clusters sorted largest first, ties by ascending id.
pub fn visit_order(clusters: &[Cluster]) -> Vec<&Cluster> {
    let mut order: Vec<&Cluster> = clusters.iter().collect();
    order.sort_by(|a, b| b.size.cmp(&a.size).then(a.cluster_id.cmp(&b.cluster_id)));
    order
}

fn draw_rng(seed: u64, cluster_id: usize, pass: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(cluster_id as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(pass as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Draws up to `n` distinct records from `clusters`, one per cluster per pass.
///
/// The pick within a cluster is uniform over its not-yet-sampled members,
/// using a generator keyed by `(seed, cluster_id, pass)`. The draw order does
/// not depend on `n`, so smaller requests are prefixes of larger ones.
pub fn draw_from_clusters(clusters: &[Cluster], n: usize, seed: u64) -> Vec<Draw> {
    let order = visit_order(clusters);
    let total: usize = clusters.iter().map(|c| c.size).sum();
    let target = n.min(total);
    let mut remaining: Vec<Vec<usize>> = order.iter().map(|c| c.member_indices.clone()).collect();
    let mut draws = Vec::with_capacity(target);
    let mut pass = 0;
    while draws.len() < target {
        pass += 1;
        for (cluster, pool) in order.iter().zip(remaining.iter_mut()) {
            if draws.len() == target {
                break;
            }
            if pool.is_empty() {
                continue;
            }
            let mut rng = draw_rng(seed, cluster.cluster_id, pass);
            let pick = rng.random_range(0..pool.len() as u64) as usize;
            let record_index = pool.remove(pick);
            draws.push(Draw {
                record_index,
                cluster_id: cluster.cluster_id,
                pass_number: pass,
            });
        }
    }
    draws
}

/// Clusters the corpus and samples `config.n_shots` labelled logs.
pub fn sample_shots(
    corpus: &Corpus,
    config: &SamplerConfig,
    header: Option<&HeaderPattern>,
) -> Result<ShotSet, SamplerError> {
    sample_shots_detailed(corpus, config, header).map(|o| o.shots)
}

pub fn sample_shots_detailed(
    corpus: &Corpus,
    config: &SamplerConfig,
    header: Option<&HeaderPattern>,
) -> Result<SampleOutcome, SamplerError> {
    config.validate()?;
    let masked = preprocess_corpus(corpus, header)?;
    let features = vectorize(&masked, config.feature_dim);
    let fit = MeanShift::new(config.bandwidth).fit(&features)?;

    // feature rows line up with masked logs; map back to record indices
    let clusters: Vec<Cluster> = fit
        .clusters
        .into_iter()
        .map(|c| {
            let members = c.member_indices.iter().map(|&row| masked[row].original_index).collect();
            Cluster::new(c.cluster_id, members)
        })
        .collect();

    let shots = draw_from_clusters(&clusters, config.n_shots, config.seed)
        .into_iter()
        .map(|d| {
            let record = &corpus.records()[d.record_index];
            Shot {
                log: record.content.clone(),
                template: record.truth_template.clone(),
                cluster_id: d.cluster_id,
                pass_number: d.pass_number,
                record_index: Some(d.record_index),
            }
        })
        .collect();

    Ok(SampleOutcome {
        shots: ShotSet {
            system: corpus.system_name().into(),
            seed: config.seed,
            requested_n: config.n_shots,
            shots,
        },
        clusters,
        bandwidth: fit.bandwidth,
    })
}
