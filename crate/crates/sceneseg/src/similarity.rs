//! Multi-dimensional dynamic time warping, barycenter averaging and
//! confidence matrices.
//!
//! DTW here is the dependent multivariate variant: one alignment over all
//! dimensions, squared Euclidean distance between frame vectors as the cell
//! cost, steps down/right/diagonal, no window by default. The returned
//! distance is the square root of the accumulated optimal-path cost, so
//! identical sequences are at distance 0 and the within-cluster sum of
//! squares decomposes into plain sums of accumulated costs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized motion features of one IU: a T x dim matrix, row per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MotionSequence {
    dim: usize,
    values: Vec<f64>,
}

impl MotionSequence {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptySequence { op: "MotionSequence::from_rows" });
        };
        let dim = first.len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch { a: dim, b: row.len() });
            }
            values.extend_from_slice(row);
        }
        Ok(Self { dim, values })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.values.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.frame(i).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for MotionSequence {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        MotionSequence::from_rows(&rows).map_err(|e| e.to_string())
    }
}

impl From<MotionSequence> for Vec<Vec<f64>> {
    fn from(seq: MotionSequence) -> Self {
        seq.rows()
    }
}

#[inline]
fn cell_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_pair(a: &MotionSequence, b: &MotionSequence) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence { op: "dtw" });
    }
    if a.dim != b.dim {
        return Err(Error::DimMismatch { a: a.dim, b: b.dim });
    }
    Ok(())
}

/// DTW distance between two sequences, optionally with a Sakoe-Chiba band
/// of half-width `band` (widened to the length difference so the corner
/// stays reachable).
pub fn dtw_distance_with_band(
    a: &MotionSequence,
    b: &MotionSequence,
    band: Option<usize>,
) -> Result<f64> {
    check_pair(a, b)?;
    let (ta, tb) = (a.len(), b.len());
    let band = band.map(|w| w.max(ta.abs_diff(tb)));

    let mut prev = vec![f64::INFINITY; tb + 1];
    let mut cur = vec![f64::INFINITY; tb + 1];
    prev[0] = 0.0;
    for i in 1..=ta {
        cur.fill(f64::INFINITY);
        let (lo, hi) = match band {
            Some(w) => (i.saturating_sub(w).max(1), (i + w).min(tb)),
            None => (1, tb),
        };
        for j in lo..=hi {
            let cost = cell_cost(a.frame(i - 1), b.frame(j - 1));
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[tb].sqrt())
}

/// Unconstrained DTW distance.
pub fn dtw_distance(a: &MotionSequence, b: &MotionSequence) -> Result<f64> {
    dtw_distance_with_band(a, b, None)
}

/// DTW distance plus one optimal alignment path as (i, j) frame pairs.
/// Ties during backtracking prefer the diagonal step.
pub fn dtw_alignment(a: &MotionSequence, b: &MotionSequence) -> Result<(f64, Vec<(usize, usize)>)> {
    check_pair(a, b)?;
    let (ta, tb) = (a.len(), b.len());
    let width = tb + 1;
    let mut acc = vec![f64::INFINITY; (ta + 1) * width];
    acc[0] = 0.0;
    for i in 1..=ta {
        for j in 1..=tb {
            let cost = cell_cost(a.frame(i - 1), b.frame(j - 1));
            let best = acc[(i - 1) * width + j - 1]
                .min(acc[(i - 1) * width + j])
                .min(acc[i * width + j - 1]);
            acc[i * width + j] = cost + best;
        }
    }

    let mut path = Vec::with_capacity(ta.max(tb));
    let (mut i, mut j) = (ta, tb);
    while i > 0 && j > 0 {
        path.push((i - 1, j - 1));
        if i == 1 && j == 1 {
            break;
        }
        let diag = if i > 1 && j > 1 { acc[(i - 1) * width + j - 1] } else { f64::INFINITY };
        let up = if i > 1 { acc[(i - 1) * width + j] } else { f64::INFINITY };
        let left = if j > 1 { acc[i * width + j - 1] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    path.reverse();
    Ok((acc[ta * width + tb].sqrt(), path))
}

/// Linear resampling to `target_len` frames.
pub(crate) fn resample(seq: &MotionSequence, target_len: usize) -> MotionSequence {
    let n = seq.len();
    if n == target_len || target_len == 0 {
        return seq.clone();
    }
    let dim = seq.dim;
    let mut values = Vec::with_capacity(target_len * dim);
    for k in 0..target_len {
        let pos = if target_len == 1 {
            0.0
        } else {
            k as f64 * (n - 1) as f64 / (target_len - 1) as f64
        };
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let t = pos - lo as f64;
        let (fa, fb) = (seq.frame(lo), seq.frame(hi));
        values.extend(fa.iter().zip(fb).map(|(x, y)| x + (y - x) * t));
    }
    MotionSequence { dim, values }
}

/// Result of barycenter refinement with the per-iteration objective
/// (mean squared DTW distance to the barycenter).
#[derive(Debug, Clone)]
pub struct BarycenterFit {
    pub barycenter: MotionSequence,
    pub objective: Vec<f64>,
}

const DBA_CONVERGENCE: f64 = 1e-9;

fn mean_sq_distance(center: &MotionSequence, seqs: &[MotionSequence]) -> Result<f64> {
    let total: f64 = seqs
        .par_iter()
        .map(|s| dtw_distance(center, s).map(|d| d * d))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    Ok(total / seqs.len() as f64)
}

/// One or more DBA passes starting from `init`.
pub(crate) fn dba_refine(
    seqs: &[MotionSequence],
    init: MotionSequence,
    iters: usize,
) -> Result<BarycenterFit> {
    let dim = init.dim;
    let mut barycenter = init;
    let mut objective = vec![mean_sq_distance(&barycenter, seqs)?];

    for _ in 0..iters {
        let paths: Vec<Vec<(usize, usize)>> = seqs
            .par_iter()
            .map(|s| dtw_alignment(&barycenter, s).map(|(_, p)| p))
            .collect::<Result<_>>()?;

        let len = barycenter.len();
        let mut sums = vec![0.0; len * dim];
        let mut counts = vec![0usize; len];
        for (seq, path) in seqs.iter().zip(&paths) {
            for &(i, j) in path {
                counts[i] += 1;
                let frame = seq.frame(j);
                for d in 0..dim {
                    sums[i * dim + d] += frame[d];
                }
            }
        }
        for i in 0..len {
            for d in 0..dim {
                sums[i * dim + d] /= counts[i] as f64;
            }
        }
        barycenter = MotionSequence { dim, values: sums };

        let obj = mean_sq_distance(&barycenter, seqs)?;
        let improved = objective.last().unwrap() - obj;
        objective.push(obj);
        if improved < DBA_CONVERGENCE {
            break;
        }
    }
    Ok(BarycenterFit { barycenter, objective })
}

fn median_length(seqs: &[MotionSequence]) -> usize {
    let mut lens: Vec<usize> = seqs.iter().map(|s| s.len()).collect();
    lens.sort_unstable();
    lens[lens.len() / 2]
}

/// DTW barycenter averaging.
///
/// Initialized with the medoid resampled to `target_len` (the median input
/// length when not given), then iteratively replaces each barycenter frame
/// by the mean of the frames aligned to it, until `iters` rounds or the
/// objective stops improving.
pub fn dtw_barycenter(
    seqs: &[MotionSequence],
    target_len: Option<usize>,
    iters: usize,
) -> Result<MotionSequence> {
    dtw_barycenter_detailed(seqs, target_len, iters).map(|fit| fit.barycenter)
}

/// As [`dtw_barycenter`], also returning the objective trace.
pub fn dtw_barycenter_detailed(
    seqs: &[MotionSequence],
    target_len: Option<usize>,
    iters: usize,
) -> Result<BarycenterFit> {
    if seqs.is_empty() {
        return Err(Error::EmptySequence { op: "dtw_barycenter" });
    }
    let dim = seqs[0].dim;
    for s in seqs {
        if s.dim != dim {
            return Err(Error::DimMismatch { a: dim, b: s.dim });
        }
        if s.is_empty() {
            return Err(Error::EmptySequence { op: "dtw_barycenter" });
        }
    }
    // medoid: input sequence with the smallest total squared distance
    let totals: Vec<f64> = seqs
        .par_iter()
        .map(|a| {
            let mut total = 0.0;
            for b in seqs {
                let d = dtw_distance(a, b)?;
                total += d * d;
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let medoid = totals
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let target = target_len.unwrap_or_else(|| median_length(seqs));
    dba_refine(seqs, resample(&seqs[medoid], target), iters)
}

/// Square matrix of pairwise (possibly averaged) distances, max-normalized
/// to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Set when all distances were 0 and normalization divided by 1 instead.
    pub degenerate_normalization: bool,
}

impl ConfidenceMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

fn normalize_matrix(labels: Vec<String>, mut values: Vec<Vec<f64>>) -> ConfidenceMatrix {
    let max = values
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0f64, f64::max);
    let degenerate = max == 0.0;
    if !degenerate {
        for row in &mut values {
            for v in row {
                *v /= max;
            }
        }
    }
    ConfidenceMatrix { labels, values, degenerate_normalization: degenerate }
}

/// Pairwise DTW distances between labeled IUs, max-normalized (SCM).
pub fn confidence_matrix(ius: &[(String, MotionSequence)]) -> Result<ConfidenceMatrix> {
    if ius.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: ius.len() });
    }
    let n = ius.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| dtw_distance(&ius[i].1, &ius[j].1))
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        values[i][j] = d;
        values[j][i] = d;
    }
    Ok(normalize_matrix(ius.iter().map(|(l, _)| l.clone()).collect(), values))
}

/// One cell of the multi-subject corpus.
#[derive(Debug, Clone)]
pub struct SubjectRep {
    pub iu_type: String,
    pub subject: String,
    pub rep: usize,
    pub seq: MotionSequence,
}

/// Multi-subject confidence matrix (MCM): entry ((a, x), (b, y)) is the mean
/// DTW distance over all repetition pairs of IU type a by subject x against
/// IU type b by subject y, max-normalized.
pub fn multi_subject_matrix(entries: &[SubjectRep]) -> Result<ConfidenceMatrix> {
    if entries.is_empty() {
        return Err(Error::InsufficientSamples { needed: 2, got: 0 });
    }
    let mut types: Vec<&str> = Vec::new();
    let mut subjects: Vec<&str> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for e in entries {
        if !types.contains(&e.iu_type.as_str()) {
            types.push(&e.iu_type);
        }
        if !subjects.contains(&e.subject.as_str()) {
            subjects.push(&e.subject);
        }
        if !reps.contains(&e.rep) {
            reps.push(e.rep);
        }
    }
    reps.sort_unstable();

    let find = |t: &str, s: &str, r: usize| -> Result<&MotionSequence> {
        entries
            .iter()
            .find(|e| e.iu_type == t && e.subject == s && e.rep == r)
            .map(|e| &e.seq)
            .ok_or_else(|| Error::MissingGridCell {
                iu_type: t.to_string(),
                subject: s.to_string(),
                rep: r,
            })
    };
    // verify completeness up front so the error names the missing cell
    for t in &types {
        for s in &subjects {
            for &r in &reps {
                find(t, s, r)?;
            }
        }
    }

    let cells: Vec<(String, &str, &str)> = types
        .iter()
        .flat_map(|t| subjects.iter().map(move |s| (format!("{t}/{s}"), *t, *s)))
        .collect();
    let n = cells.len();
    let values: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|(_, ta, sx)| {
            cells
                .iter()
                .map(|(_, tb, sy)| {
                    let mut total = 0.0;
                    for &m in &reps {
                        for &r in &reps {
                            total += dtw_distance(find(ta, sx, m)?, find(tb, sy, r)?)?;
                        }
                    }
                    Ok(total / (reps.len() * reps.len()) as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    debug_assert_eq!(values.len(), n);
    Ok(normalize_matrix(cells.into_iter().map(|(l, _, _)| l).collect(), values))
}
