//! IU clustering: k-means under DTW with elbow selection for motion,
//! density-based grouping for context, and the ensemble merge of both.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::{dba_refine, dtw_distance, MotionSequence};

#[derive(Debug, Clone, Copy)]
pub struct KmeansOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub dba_iters: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { restarts: 10, seed: 0, max_iters: 50, dba_iters: 10 }
    }
}

/// Result of k-means over DTW distances.
#[derive(Debug, Clone)]
pub struct MotionClustering {
    pub k: usize,
    /// Cluster labels, 1-based.
    pub labels: Vec<usize>,
    pub barycenters: Vec<MotionSequence>,
    /// Sum of squared DTW distances of each IU to its barycenter.
    pub wcss: f64,
    /// WCSS after every assignment step of the winning restart.
    pub wcss_trace: Vec<f64>,
}

fn assign(
    seqs: &[MotionSequence],
    centers: &[MotionSequence],
) -> Result<(Vec<usize>, Vec<f64>, f64)> {
    let per_seq: Vec<(usize, f64)> = seqs
        .par_iter()
        .map(|s| {
            let mut best = (0usize, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = dtw_distance(s, center)?;
                if d < best.1 {
                    best = (c, d);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let labels: Vec<usize> = per_seq.iter().map(|&(c, _)| c).collect();
    let dists: Vec<f64> = per_seq.iter().map(|&(_, d)| d).collect();
    let wcss = dists.iter().map(|d| d * d).sum();
    Ok((labels, dists, wcss))
}

/// k-means++ style seeding: first center uniform, each next drawn with
/// probability proportional to the squared distance to the nearest center.
fn seed_centers(
    seqs: &[MotionSequence],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MotionSequence>> {
    let n = seqs.len();
    let mut chosen: Vec<usize> = vec![rng.random_range(0..n)];
    let mut nearest_sq: Vec<f64> = seqs
        .par_iter()
        .map(|s| dtw_distance(s, &seqs[chosen[0]]).map(|d| d * d))
        .collect::<Result<_>>()?;
    while chosen.len() < k {
        let total: f64 = nearest_sq.iter().sum();
        let next = if total > 0.0 {
            let weighted = WeightedIndex::new(&nearest_sq).expect("non-negative weights");
            weighted.sample(rng)
        } else {
            // all remaining points coincide with a center; take the first
            // index not yet chosen
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        let updates: Vec<f64> = seqs
            .par_iter()
            .zip(&nearest_sq)
            .map(|(s, &cur)| {
                let d = dtw_distance(s, &seqs[next])?;
                Ok(cur.min(d * d))
            })
            .collect::<Result<_>>()?;
        nearest_sq = updates;
    }
    Ok(chosen.into_iter().map(|i| seqs[i].clone()).collect())
}

fn lloyd(
    seqs: &[MotionSequence],
    k: usize,
    opts: &KmeansOptions,
    rng: &mut ChaCha8Rng,
) -> Result<MotionClustering> {
    let mut centers = seed_centers(seqs, k, rng)?;
    let (mut labels, _, mut wcss) = assign(seqs, &centers)?;
    let mut trace = vec![wcss];

    for _ in 0..opts.max_iters {
        let new_centers: Vec<MotionSequence> = centers
            .par_iter()
            .enumerate()
            .map(|(c, old)| {
                let members: Vec<MotionSequence> = labels
                    .iter()
                    .zip(seqs)
                    .filter(|(&l, _)| l == c)
                    .map(|(_, s)| s.clone())
                    .collect();
                if members.is_empty() {
                    return Ok(old.clone());
                }
                Ok(dba_refine(&members, old.clone(), opts.dba_iters)?.barycenter)
            })
            .collect::<Result<_>>()?;
        centers = new_centers;
        let (new_labels, _, new_wcss) = assign(seqs, &centers)?;
        trace.push(new_wcss);
        let stable = new_labels == labels;
        labels = new_labels;
        wcss = new_wcss;
        if stable {
            break;
        }
    }

    Ok(MotionClustering {
        k,
        labels: labels.iter().map(|&c| c + 1).collect(),
        barycenters: centers,
        wcss,
        wcss_trace: trace,
    })
}

/// Lloyd-style k-means with DTW assignments and DBA centroid updates,
/// restarted `opts.restarts` times with distinct seedings; the minimum-WCSS
/// run wins. Deterministic for a given seed.
pub fn kmeans_dtw(seqs: &[MotionSequence], k: usize, opts: &KmeansOptions) -> Result<MotionClustering> {
    if seqs.is_empty() {
        return Err(Error::EmptySequence { op: "kmeans_dtw" });
    }
    if k == 0 || k > seqs.len() {
        return Err(Error::KTooLarge { k, n: seqs.len() });
    }
    let mut best: Option<MotionClustering> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let run = lloyd(seqs, k, opts, &mut rng)?;
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Pick k at the elbow of the WCSS curve: the interior k maximizing the
/// second difference of the curve on a log scale, ties resolved towards the
/// smallest k. `wcss[i]` is the value for k = i + 1.
///
/// The log scale makes the curvature measure the change in *relative*
/// improvement, so a huge first drop (one far-out cluster) cannot mask the
/// real elbow further right.
pub fn elbow_select(wcss: &[f64]) -> Result<usize> {
    if wcss.len() < 3 {
        return Err(Error::ElbowRangeTooShort(wcss.len()));
    }
    // guard against exact zeros at k close to the corpus size
    let floor = wcss.iter().fold(0.0f64, |a, &b| a.max(b)) * 1e-12 + f64::MIN_POSITIVE;
    let log: Vec<f64> = wcss.iter().map(|&w| (w.max(floor)).ln()).collect();
    let mut best_k = 2;
    let mut best_curvature = f64::NEG_INFINITY;
    for k in 2..log.len() {
        let curvature = log[k - 2] - 2.0 * log[k - 1] + log[k];
        if curvature > best_curvature {
            best_curvature = curvature;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// Context clustering result; labels are 1-based in first-occurrence order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextClustering {
    pub labels: Vec<usize>,
}

/// Neighborhood radius for context DBSCAN. Integer context vectors differ
/// by at least 1 per differing slot, so any radius below 1 groups exactly
/// the identical vectors; 0.5 realizes the similar-iff-distance-below-1
/// criterion without boundary ambiguity.
pub const CONTEXT_EPS: f64 = 0.5;
/// A single point forms a cluster: no context is noise.
pub const CONTEXT_MIN_PTS: usize = 1;

fn euclidean(a: &[i64], b: &[i64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// DBSCAN over context vectors with Euclidean distance.
///
/// With the parameters above this partitions the IUs by exact context
/// equality: identical vectors share a label, any difference separates.
pub fn context_clusters(contexts: &[Vec<i64>]) -> Result<ContextClustering> {
    let n = contexts.len();
    if n == 0 {
        return Ok(ContextClustering { labels: Vec::new() });
    }
    let width = contexts[0].len();
    for c in contexts {
        if c.len() != width {
            return Err(Error::DimMismatch { a: width, b: c.len() });
        }
    }

    let region_query = |p: usize| -> Vec<usize> {
        (0..n).filter(|&q| euclidean(&contexts[p], &contexts[q]) <= CONTEXT_EPS).collect()
    };

    let mut labels = vec![0usize; n];
    let mut next_label = 0usize;
    for p in 0..n {
        if labels[p] != 0 {
            continue;
        }
        let neighborhood = region_query(p);
        if neighborhood.len() < CONTEXT_MIN_PTS {
            continue; // unreachable with MIN_PTS = 1, kept for algorithm shape
        }
        next_label += 1;
        labels[p] = next_label;
        let mut frontier = neighborhood;
        while let Some(q) = frontier.pop() {
            if labels[q] != 0 {
                continue;
            }
            labels[q] = next_label;
            let expansion = region_query(q);
            if expansion.len() >= CONTEXT_MIN_PTS {
                frontier.extend(expansion.into_iter().filter(|&r| labels[r] == 0));
            }
        }
    }
    Ok(ContextClustering { labels })
}

/// Combined motion and context label of one IU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedLabel {
    pub motion: usize,
    pub context: usize,
    /// Stable renumbering of the (motion, context) pair by first occurrence,
    /// 1-based.
    pub label: usize,
}

/// Merge the two clusterings into per-IU combined labels.
pub fn ensemble_merge(
    motion: &MotionClustering,
    context: &ContextClustering,
) -> Result<Vec<CombinedLabel>> {
    if motion.labels.len() != context.labels.len() {
        return Err(Error::LabelIndexMismatch { a: motion.labels.len(), b: context.labels.len() });
    }
    let mut seen: Vec<(usize, usize)> = Vec::new();
    Ok(motion
        .labels
        .iter()
        .zip(&context.labels)
        .map(|(&m, &c)| {
            let pair = (m, c);
            let label = match seen.iter().position(|&p| p == pair) {
                Some(ix) => ix + 1,
                None => {
                    seen.push(pair);
                    seen.len()
                }
            };
            CombinedLabel { motion: m, context: c, label }
        })
        .collect())
}
