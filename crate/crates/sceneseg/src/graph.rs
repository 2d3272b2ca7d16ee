//! Per-hand scene graphs.
//!
//! For each frame and each hand we build a graph whose nodes are the
//! foreground video objects (everything touching something) and whose edges
//! connect pairs whose interaction points are within the contact threshold.
//! Edges carry the distance, a joint-motion flag, and the quantized relative
//! motion direction in each direction.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::scene::{
    KinematicState, ObjectCatalog, ObjectObservation, Orientation, SceneFrame, VideoObjectId,
};

/// Directed relation attributes of one edge.
///
/// `direction` is NONE when the moving endpoint is below the speed
/// dead-zone, when the pair moves jointly, or when the target is a hand
/// (hands carry no orientation frame to project into).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relation {
    /// Minimum interaction-point distance, meters.
    pub distance: f64,
    /// Whether the two endpoints move as one unit (in-hand / integral).
    pub joint_motion: bool,
    /// Quantized (elevation, azimuth) bins of the source's velocity
    /// expressed in the target's frame, 1-based.
    pub direction: Option<(u32, u32)>,
}

/// Both directed relations of an undirected contact edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRelations {
    /// Relation of the smaller node id moving relative to the larger.
    pub forward: Relation,
    /// Relation of the larger node id moving relative to the smaller.
    pub reverse: Relation,
}

/// Per-node attributes kept on the graph.
#[derive(Debug, Clone)]
pub struct NodeAttrs {
    pub kinematics: KinematicState,
    pub world_ips: Vec<Point3<f64>>,
    /// None for hands, which have no estimated orientation.
    pub orientation: Option<Orientation>,
}

/// Foreground scene graph of one hand in one frame.
#[derive(Debug, Clone)]
pub struct SceneGraph {
    pub hand_id: VideoObjectId,
    pub nodes: BTreeMap<VideoObjectId, NodeAttrs>,
    /// Keyed by (min, max) node id.
    pub edges: BTreeMap<(VideoObjectId, VideoObjectId), EdgeRelations>,
}

impl SceneGraph {
    /// Directed relation from `from` towards `to`, if the edge exists.
    pub fn relation(&self, from: VideoObjectId, to: VideoObjectId) -> Option<Relation> {
        if from < to {
            self.edges.get(&(from, to)).map(|e| e.forward)
        } else {
            self.edges.get(&(to, from)).map(|e| e.reverse)
        }
    }

    pub fn neighbors(&self, id: VideoObjectId) -> impl Iterator<Item = (VideoObjectId, f64)> + '_ {
        self.edges.iter().filter_map(move |(&(a, b), e)| {
            if a == id {
                Some((b, e.forward.distance))
            } else if b == id {
                Some((a, e.forward.distance))
            } else {
                None
            }
        })
    }
}

/// Transform an object's catalog interaction points into the world frame.
pub fn world_interaction_points(
    obs: &ObjectObservation,
    local: &[Point3<f64>],
) -> Vec<Point3<f64>> {
    local
        .iter()
        .map(|p| Point3::from(obs.orientation.rotate(&p.coords) + obs.position.coords))
        .collect()
}

/// Minimum Euclidean distance over all cross pairs of interaction points.
pub fn min_interaction_distance(a: &[Point3<f64>], b: &[Point3<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut best = f64::INFINITY;
    for pa in a {
        for pb in b {
            let d = (pa - pb).norm();
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Whether two contacting video objects move as one unit.
///
/// True when the tangential acceleration signs are concordant and non-zero,
/// or when both are at rest (speeds below the dead-zone) while in contact —
/// the resting-contact case that keeps a placed piece integral with its
/// container.
pub fn joint_motion(a: &KinematicState, b: &KinematicState, eps_v: f64) -> bool {
    if a.accel_sign != 0 && a.accel_sign == b.accel_sign {
        return true;
    }
    a.accel_sign == 0 && b.accel_sign == 0 && a.speed < eps_v && b.speed < eps_v
}

/// Uniform quantization of a wrapped angle into `bins` bins over `[lo, hi)`.
/// Returns a 1-based bin index, clamped to `[1, bins]`.
pub fn quantize_angle(angle: f64, bins: u32, lo: f64, hi: f64) -> u32 {
    debug_assert!(bins >= 2 && hi > lo);
    let span = hi - lo;
    let wrapped = angle - span * ((angle - lo) / span).floor();
    let bin = ((wrapped - lo) / (span / bins as f64)).floor() as i64 + 1;
    bin.clamp(1, bins as i64) as u32
}

/// Quantization setup for interaction directions.
#[derive(Debug, Clone, Copy)]
pub struct DirectionParams {
    pub theta_bins: u32,
    pub phi_bins: u32,
    pub eps_v: f64,
}

impl DirectionParams {
    pub fn from_params(p: &crate::scene::Params) -> Self {
        Self { theta_bins: p.theta_bins, phi_bins: p.phi_bins, eps_v: p.eps_v }
    }
}

/// Quantized direction of `velocity` expressed in the target frame given by
/// `orientation`. Returns NONE below the speed dead-zone.
///
/// Azimuth bins partition [0, 2pi); elevation bins partition
/// [-pi/2, pi/2] with the +pi/2 pole assigned to the top bin. When the
/// horizontal component is below the dead-zone the azimuth is pinned to 0,
/// so near-vertical motion lands in a stable bin.
pub fn interaction_direction(
    velocity: &Vector3<f64>,
    orientation: &Orientation,
    params: &DirectionParams,
) -> Option<(u32, u32)> {
    if velocity.norm() < params.eps_v {
        return None;
    }
    let w = orientation.rotate_inverse(velocity);
    let horizontal = w.x.hypot(w.y);
    let azimuth = if horizontal < params.eps_v { 0.0 } else { w.y.atan2(w.x) };
    let elevation = w.z.atan2(horizontal);

    let phi_q = quantize_angle(azimuth, params.phi_bins, 0.0, TAU);
    let theta_q = if elevation >= FRAC_PI_2 {
        params.theta_bins
    } else {
        quantize_angle(elevation, params.theta_bins, -FRAC_PI_2, FRAC_PI_2)
    };
    Some((theta_q, phi_q))
}

fn directed_relation(
    distance: f64,
    jm: bool,
    source: &NodeAttrs,
    target: &NodeAttrs,
    params: &DirectionParams,
) -> Relation {
    let direction = match (&target.orientation, jm) {
        (Some(orientation), false) => {
            interaction_direction(&source.kinematics.velocity, orientation, params)
        }
        _ => None,
    };
    Relation { distance, joint_motion: jm, direction }
}

/// Build the scene graph of `hand_id` for one frame.
///
/// Nodes are the hand plus every object that lies on a contact edge; objects
/// touching nothing are background and discarded. Other hands are excluded
/// entirely — each hand gets its own graph.
pub fn build_scene_graph(
    frame: &SceneFrame,
    kinematics: &BTreeMap<VideoObjectId, KinematicState>,
    hand_id: VideoObjectId,
    catalog: &ObjectCatalog,
) -> Result<SceneGraph> {
    let hand = frame.hand(hand_id).ok_or(Error::HandNotInFrame(hand_id.id))?;
    let schema = catalog
        .hand_schema(hand_id)
        .ok_or_else(|| Error::InvalidCatalog(format!("{hand_id} not in catalog")))?;

    let mut attrs: BTreeMap<VideoObjectId, NodeAttrs> = BTreeMap::new();
    let hand_ips: Vec<Point3<f64>> = schema
        .interaction_point_indices
        .iter()
        .map(|&ix| {
            hand.landmarks.get(ix).copied().ok_or_else(|| Error::InvalidFrame {
                frame: 0,
                summary: format!("{hand_id}: landmark index {ix} out of range"),
            })
        })
        .collect::<Result<_>>()?;
    attrs.insert(
        hand_id,
        NodeAttrs {
            kinematics: kinematics.get(&hand_id).copied().unwrap_or_else(KinematicState::at_rest),
            world_ips: hand_ips,
            orientation: None,
        },
    );
    for obs in &frame.objects {
        let spec = catalog
            .object_spec(obs.id)
            .ok_or_else(|| Error::InvalidCatalog(format!("{} not in catalog", obs.id)))?;
        attrs.insert(
            obs.id,
            NodeAttrs {
                kinematics: kinematics.get(&obs.id).copied().unwrap_or_else(KinematicState::at_rest),
                world_ips: world_interaction_points(obs, &spec.interaction_points),
                orientation: Some(obs.orientation),
            },
        );
    }

    // Contact edges over all candidate pairs.
    let ids: Vec<VideoObjectId> = attrs.keys().copied().collect();
    let mut contacts: Vec<(VideoObjectId, VideoObjectId, f64)> = Vec::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let d = min_interaction_distance(&attrs[&a].world_ips, &attrs[&b].world_ips)?;
            if d <= catalog.params.d_contact {
                contacts.push((a, b, d));
            }
        }
    }

    // Foreground: the hand plus everything incident to a contact edge.
    let mut keep: Vec<VideoObjectId> = vec![hand_id];
    for &(a, b, _) in &contacts {
        if !keep.contains(&a) {
            keep.push(a);
        }
        if !keep.contains(&b) {
            keep.push(b);
        }
    }
    attrs.retain(|id, _| keep.contains(id));

    let dir_params = DirectionParams::from_params(&catalog.params);
    let eps_v = catalog.params.eps_v;
    let mut edges = BTreeMap::new();
    for (a, b, d) in contacts {
        let jm = joint_motion(&attrs[&a].kinematics, &attrs[&b].kinematics, eps_v);
        let forward = directed_relation(d, jm, &attrs[&a], &attrs[&b], &dir_params);
        let reverse = directed_relation(d, jm, &attrs[&b], &attrs[&a], &dir_params);
        edges.insert((a, b), EdgeRelations { forward, reverse });
    }

    Ok(SceneGraph { hand_id, nodes: attrs, edges })
}
