#![allow(dead_code)]

//! Independent oracles shared by the integration suites. Everything here is
//! deliberately brute-force and kept apart from the implementation paths it
//! checks.

use nalgebra::{Matrix4, Point3, UnitQuaternion, Vector3};
use sceneseg::scenario::{generate_scenario, ScenarioSpec};
use sceneseg::scene::SceneFrame;
use sceneseg::similarity::MotionSequence;

/// DTW by exhaustive enumeration of every monotone alignment path
/// (steps down/right/diagonal), accumulating squared Euclidean cell costs
/// and taking the square root of the minimum at the end.
pub fn brute_force_dtw(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn cell(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
    fn walk(a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize) -> f64 {
        let here = cell(&a[i], &b[j]);
        if i == a.len() - 1 && j == b.len() - 1 {
            return here;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.len() {
            best = best.min(walk(a, b, i + 1, j));
        }
        if j + 1 < b.len() {
            best = best.min(walk(a, b, i, j + 1));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            best = best.min(walk(a, b, i + 1, j + 1));
        }
        here + best
    }
    walk(a, b, 0, 0).sqrt()
}

/// All-pairs shortest path distances by Floyd-Warshall over an edge list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        dist[a][b] = dist[a][b].min(w);
        dist[b][a] = dist[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    dist
}

/// Rigid transform of a point via an explicit 4x4 homogeneous matrix.
pub fn homogeneous_transform(
    rotation: &UnitQuaternion<f64>,
    translation: &Vector3<f64>,
    p: &Point3<f64>,
) -> Point3<f64> {
    let r = rotation.to_rotation_matrix();
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
    let v = m * nalgebra::Vector4::new(p.x, p.y, p.z, 1.0);
    Point3::new(v.x / v.w, v.y / v.w, v.z / v.w)
}

/// Run-length encoding of a sequence of comparable values.
pub fn rle_runs<T: PartialEq + Clone>(values: &[T]) -> Vec<(usize, usize, T)> {
    let mut runs: Vec<(usize, usize, T)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some((_, end, last)) if last == v => *end = i + 1,
            _ => runs.push((i, i + 1, v.clone())),
        }
    }
    runs
}

/// Grayscale erosion/dilation written as explicit window scans.
pub fn naive_erode(signal: &[i64], radius: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(signal.len());
    for i in 0..signal.len() {
        let mut m = i64::MAX;
        for j in i.saturating_sub(radius)..=(i + radius).min(signal.len() - 1) {
            m = m.min(signal[j]);
        }
        out.push(m);
    }
    out
}

pub fn naive_dilate(signal: &[i64], radius: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(signal.len());
    for i in 0..signal.len() {
        let mut m = i64::MIN;
        for j in i.saturating_sub(radius)..=(i + radius).min(signal.len() - 1) {
            m = m.max(signal[j]);
        }
        out.push(m);
    }
    out
}

/// Opening-closing via the naive scans.
pub fn naive_open_close(signal: &[i64], se_len: usize) -> Vec<i64> {
    let r = se_len / 2;
    if r == 0 || signal.is_empty() {
        return signal.to_vec();
    }
    let opened = naive_dilate(&naive_erode(signal, r), r);
    naive_erode(&naive_dilate(&opened, r), r)
}

/// Rigid transform applied to a whole frame (positions, landmarks,
/// orientations).
pub fn transform_frame(
    frame: &SceneFrame,
    rotation: &UnitQuaternion<f64>,
    translation: &Vector3<f64>,
) -> SceneFrame {
    use sceneseg::scene::Orientation;
    let mut out = frame.clone();
    for hand in &mut out.hands {
        for lm in &mut hand.landmarks {
            *lm = Point3::from(rotation.transform_vector(&lm.coords) + translation);
        }
    }
    for obj in &mut out.objects {
        obj.position = Point3::from(rotation.transform_vector(&obj.position.coords) + translation);
        obj.orientation = match obj.orientation {
            Orientation::Spatial(q) => Orientation::Spatial(rotation * q),
            Orientation::Planar(a) => Orientation::Planar(a), // only valid for z rotations
        };
    }
    out
}

pub fn seq_from_rows(rows: &[Vec<f64>]) -> MotionSequence {
    MotionSequence::from_rows(rows).unwrap()
}

/// Convenience scenario constructor used across the suites.
pub fn spec_with(template: sceneseg::scenario::Template, seed: u64, noise: f64) -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(template);
    spec.seed = seed;
    spec.noise = noise;
    spec
}

pub fn frames_of(spec: &ScenarioSpec) -> Vec<SceneFrame> {
    generate_scenario(spec).unwrap().frames
}
