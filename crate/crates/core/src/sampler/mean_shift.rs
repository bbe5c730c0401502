//! Flat-kernel Mean Shift.
//!
//! Every distinct point seeds one mode search. A search repeatedly moves to
//! the mean of all points within `bandwidth` until the shift drops below
//! `1e-4 * bandwidth` or 300 iterations pass. Modes closer than
//! `bandwidth / 2` are merged, strongest (most points in range) first, and
//! each point joins its nearest surviving mode.
//!
//! Duplicate rows are folded into weighted unique points before the search.
//! The flat-kernel mean over a multiset equals the weighted mean over its
//! distinct elements, so the result is the same as seeding from every row.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::vectorize::FeatureMatrix;
use super::{Cluster, SamplerError};

pub const MAX_ITERATIONS: usize = 300;
pub const CONVERGENCE_FACTOR: f64 = 1e-4;
pub const BANDWIDTH_SUBSAMPLE: usize = 500;

/// Output of [`MeanShift::fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeanShiftFit {
    pub clusters: Vec<Cluster>,
    /// Bandwidth used, or `None` when every point coincided and no search ran.
    pub bandwidth: Option<f64>,
    /// Surviving modes, indexed by cluster id.
    pub modes: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanShift {
    bandwidth: Option<f64>,
}

impl MeanShift {
    pub fn new(bandwidth: Option<f64>) -> Self {
        Self { bandwidth }
    }

    pub fn fit(&self, features: &FeatureMatrix) -> Result<MeanShiftFit, SamplerError> {
        let n = features.rows();
        if n == 0 {
            return Err(SamplerError::EmptyInput);
        }
        check_finite(features)?;
        if let Some(bw) = self.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(SamplerError::InvalidBandwidth(bw));
            }
        }

        let points = UniquePoints::new(features);
        if points.len() == 1 {
            return Ok(single_cluster(features));
        }
        let bandwidth = match self.bandwidth {
            Some(bw) => bw,
            None => match estimate_bandwidth(features) {
                Some(bw) => bw,
                None => return Ok(single_cluster(features)),
            },
        };

        let dim = features.dim();
        let radius_sq = bandwidth * bandwidth;
        let tolerance = CONVERGENCE_FACTOR * bandwidth;

        // (mode, intensity, seed) per distinct point
        let mut searches: Vec<(Vec<f64>, usize, usize)> = (0..points.len())
            .map(|seed| {
                let (mode, intensity) = points.seek_mode(seed, radius_sq, tolerance, dim);
                (mode, intensity, seed)
            })
            .collect();
        searches.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

        let merge_sq = (bandwidth / 2.0) * (bandwidth / 2.0);
        let mut modes: Vec<Vec<f64>> = Vec::new();
        for (mode, _, _) in searches {
            if !modes.iter().any(|m| sq_dist(m, &mode) < merge_sq) {
                modes.push(mode);
            }
        }

        let unique_label: Vec<usize> = (0..points.len())
            .map(|u| nearest(&modes, points.point(u)))
            .collect();
        let labels: Vec<usize> = points.owner.iter().map(|&u| unique_label[u]).collect();
        let (clusters, order) = clusters_from_labels(&labels);
        let modes = order.into_iter().map(|m| modes[m].clone()).collect();
        Ok(MeanShiftFit {
            clusters,
            bandwidth: Some(bandwidth),
            modes,
        })
    }
}

/// Clusters `features` with flat-kernel Mean Shift.
///
/// When `bandwidth` is `None` it is estimated from the data; see
/// [`estimate_bandwidth`].
pub fn mean_shift(
    features: &FeatureMatrix,
    bandwidth: Option<f64>,
) -> Result<Vec<Cluster>, SamplerError> {
    MeanShift::new(bandwidth).fit(features).map(|fit| fit.clusters)
}

/// Median pairwise Euclidean distance over a strided subsample of
/// `min(500, n)` rows.
///
/// A zero median with some distinct points falls back to the median of the
/// non-zero distances. Returns `None` when all sampled rows coincide.
pub fn estimate_bandwidth(features: &FeatureMatrix) -> Option<f64> {
    let n = features.rows();
    let m = n.min(BANDWIDTH_SUBSAMPLE);
    if m < 2 {
        return None;
    }
    let stride = n / m;
    let sample: Vec<&[f64]> = (0..m).map(|i| features.row(i * stride)).collect();
    let mut dists = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            dists.push(libm::sqrt(sq_dist(sample[i], sample[j])));
        }
    }
    dists.sort_by(f64::total_cmp);
    let med = median_sorted(&dists);
    if med > 0.0 {
        return Some(med);
    }
    let first_positive = dists.partition_point(|d| *d <= 0.0);
    let positive = &dists[first_positive..];
    if positive.is_empty() {
        None
    } else {
        Some(median_sorted(positive))
    }
}

fn median_sorted(values: &[f64]) -> f64 {
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    }
}

fn check_finite(features: &FeatureMatrix) -> Result<(), SamplerError> {
    for row in 0..features.rows() {
        if let Some(col) = features.row(row).iter().position(|v| !v.is_finite()) {
            return Err(SamplerError::NonFiniteFeature { row, col });
        }
    }
    Ok(())
}

fn single_cluster(features: &FeatureMatrix) -> MeanShiftFit {
    let members: Vec<usize> = (0..features.rows()).collect();
    MeanShiftFit {
        clusters: vec![Cluster::new(0, members)],
        bandwidth: None,
        modes: vec![features.row(0).to_vec()],
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(modes: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, m) in modes.iter().enumerate() {
        let d = sq_dist(m, p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Groups row labels into clusters numbered by first member.
///
/// Returns the clusters and, for each new id, the label it came from.
fn clusters_from_labels(labels: &[usize]) -> (Vec<Cluster>, Vec<usize>) {
    let mut id_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut order = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let id = *id_of.entry(label).or_insert_with(|| {
            members.push(Vec::new());
            order.push(label);
            members.len() - 1
        });
        members[id].push(i);
    }
    let clusters = members
        .into_iter()
        .enumerate()
        .map(|(id, m)| Cluster::new(id, m))
        .collect();
    (clusters, order)
}

/// Distinct rows with their multiplicities.
struct UniquePoints<'a> {
    features: &'a FeatureMatrix,
    /// First row index of each distinct point.
    representative: Vec<usize>,
    weight: Vec<f64>,
    /// Distinct point of each row.
    owner: Vec<usize>,
}

impl<'a> UniquePoints<'a> {
    fn new(features: &'a FeatureMatrix) -> Self {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut representative = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        let mut owner = Vec::with_capacity(features.rows());
        for i in 0..features.rows() {
            // +0.0 and -0.0 are the same point
            let key: Vec<u64> = features.row(i).iter().map(|v| (v + 0.0).to_bits()).collect();
            let u = *seen.entry(key).or_insert_with(|| {
                representative.push(i);
                weight.push(0.0);
                representative.len() - 1
            });
            weight[u] += 1.0;
            owner.push(u);
        }
        Self {
            features,
            representative,
            weight,
            owner,
        }
    }

    fn len(&self) -> usize {
        self.representative.len()
    }

    fn point(&self, u: usize) -> &[f64] {
        self.features.row(self.representative[u])
    }

    /// Runs one mode search from distinct point `seed`.
    ///
    /// Returns the converged mode and the number of rows within range of it.
    fn seek_mode(&self, seed: usize, radius_sq: f64, tolerance: f64, dim: usize) -> (Vec<f64>, usize) {
        let mut x = self.point(seed).to_vec();
        let mut next = vec![0.0; dim];
        for _ in 0..MAX_ITERATIONS {
            next.iter_mut().for_each(|v| *v = 0.0);
            let mut total = 0.0;
            for u in 0..self.len() {
                let p = self.point(u);
                if sq_dist(&x, p) <= radius_sq {
                    let w = self.weight[u];
                    total += w;
                    next.iter_mut().zip(p).for_each(|(acc, v)| *acc += w * v);
                }
            }
            if total == 0.0 {
                break;
            }
            next.iter_mut().for_each(|v| *v /= total);
            let shift = libm::sqrt(sq_dist(&x, &next));
            core::mem::swap(&mut x, &mut next);
            if shift < tolerance {
                break;
            }
        }
        let intensity = (0..self.len())
            .filter(|&u| sq_dist(&x, self.point(u)) <= radius_sq)
            .map(|u| self.weight[u] as usize)
            .sum();
        (x, intensity)
    }
}
