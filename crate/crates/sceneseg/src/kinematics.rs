//! Finite-difference kinematics estimation.
//!
//! Positions are smoothed with a centered moving average, velocity comes
//! from central differences (one-sided at the stream boundaries), and the
//! tangential acceleration is the derivative of speed. Dead-zones clamp
//! near-zero speeds and accelerations so the downstream sign features are
//! stable under landmark jitter.

use std::collections::BTreeMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::scene::{KinematicState, ObjectCatalog, SceneFrame, VideoObjectId};

#[derive(Debug, Clone, Copy)]
pub struct KinematicsParams {
    /// Centered moving-average width, odd, in frames.
    pub smoothing_window: usize,
    /// Speed dead-zone, m/s.
    pub eps_v: f64,
    /// Acceleration dead-zone, m/s^2.
    pub eps_alpha: f64,
}

impl KinematicsParams {
    pub fn from_params(p: &crate::scene::Params) -> Self {
        Self { smoothing_window: p.smoothing_window, eps_v: p.eps_v, eps_alpha: p.eps_alpha }
    }
}

fn check_timestamps(timestamps: &[f64], max_gap: Option<f64>) -> Result<()> {
    for i in 1..timestamps.len() {
        if timestamps[i] <= timestamps[i - 1] {
            return Err(Error::NonMonotonicTime {
                index: i,
                prev: timestamps[i - 1],
                next: timestamps[i],
            });
        }
        if let Some(max) = max_gap {
            let gap = timestamps[i] - timestamps[i - 1];
            if gap > max {
                return Err(Error::TimeGapExceeded { index: i, gap, max });
            }
        }
    }
    Ok(())
}

/// Centered moving average of width `w`; the window is clipped at the
/// signal boundaries.
pub(crate) fn smooth(positions: &[Point3<f64>], w: usize) -> Vec<Point3<f64>> {
    let r = w / 2;
    let n = positions.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(n - 1);
            let mut acc = Vector3::zeros();
            for p in &positions[lo..=hi] {
                acc += p.coords;
            }
            Point3::from(acc / (hi - lo + 1) as f64)
        })
        .collect()
}

/// Derivative by central differences, one-sided at both ends.
/// `n >= 2` is assumed by the caller.
fn differentiate<T, F>(n: usize, timestamps: &[f64], value: F) -> Vec<T>
where
    T: std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T> + Copy,
    F: Fn(usize) -> T,
{
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (value(b) - value(a)) / (timestamps[b] - timestamps[a])
        })
        .collect()
}

/// Estimate the kinematic state of one tracked point over a stream.
///
/// Needs at least 3 samples and strictly increasing timestamps. Speeds
/// below `eps_v` are clamped to exactly 0 (direction undefined, velocity
/// zeroed); the acceleration sign uses the `eps_alpha` dead-zone.
pub fn estimate_kinematics(
    positions: &[Point3<f64>],
    timestamps: &[f64],
    params: &KinematicsParams,
) -> Result<Vec<KinematicState>> {
    let n = positions.len();
    if n < 3 || timestamps.len() != n {
        return Err(Error::InsufficientSamples { needed: 3, got: n.min(timestamps.len()) });
    }
    check_timestamps(timestamps, None)?;

    let smoothed = smooth(positions, params.smoothing_window);
    let velocity: Vec<Vector3<f64>> = differentiate(n, timestamps, |i| smoothed[i].coords);
    let speed: Vec<f64> = velocity
        .iter()
        .map(|v| {
            let s = v.norm();
            if s < params.eps_v {
                0.0
            } else {
                s
            }
        })
        .collect();
    let accel: Vec<f64> = differentiate(n, timestamps, |i| speed[i]);

    Ok((0..n)
        .map(|i| {
            let clamped = speed[i] == 0.0;
            let alpha = accel[i];
            let sign = if alpha.abs() <= params.eps_alpha {
                0
            } else if alpha > 0.0 {
                1
            } else {
                -1
            };
            KinematicState {
                velocity: if clamped { Vector3::zeros() } else { velocity[i] },
                speed: speed[i],
                tangential_accel: alpha,
                accel_sign: sign,
            }
        })
        .collect())
}

/// Reference position of one video object in one frame: the configured
/// knuckle landmark for hands, the centroid for objects.
pub fn reference_position(
    frame: &SceneFrame,
    id: VideoObjectId,
    catalog: &ObjectCatalog,
) -> Option<Point3<f64>> {
    if id.is_hand() {
        let schema = catalog.hand_schema(id)?;
        frame.hand(id)?.landmarks.get(schema.reference_landmark).copied()
    } else {
        Some(frame.object(id)?.position)
    }
}

/// Per-frame kinematic states for every id in the stream.
///
/// The set of tracked ids must be constant across frames; streams where
/// objects appear or vanish mid-way are rejected.
pub fn stream_kinematics(
    frames: &[SceneFrame],
    catalog: &ObjectCatalog,
) -> Result<Vec<BTreeMap<VideoObjectId, KinematicState>>> {
    if frames.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: frames.len() });
    }
    let timestamps: Vec<f64> = frames.iter().map(|f| f.timestamp).collect();
    check_timestamps(&timestamps, catalog.params.max_time_gap)?;

    let mut ids: Vec<VideoObjectId> = frames[0]
        .hands
        .iter()
        .map(|h| h.id)
        .chain(frames[0].objects.iter().map(|o| o.id))
        .collect();
    ids.sort_unstable();

    let params = KinematicsParams::from_params(&catalog.params);
    let mut per_id: BTreeMap<VideoObjectId, Vec<KinematicState>> = BTreeMap::new();
    for &id in &ids {
        let mut positions = Vec::with_capacity(frames.len());
        for (i, frame) in frames.iter().enumerate() {
            let p = reference_position(frame, id, catalog).ok_or_else(|| Error::InvalidFrame {
                frame: i,
                summary: format!("{id} missing from frame (the tracked set must be constant)"),
            })?;
            positions.push(p);
        }
        per_id.insert(id, estimate_kinematics(&positions, &timestamps, &params)?);
    }

    Ok((0..frames.len())
        .map(|i| ids.iter().map(|&id| (id, per_id[&id][i])).collect())
        .collect())
}
