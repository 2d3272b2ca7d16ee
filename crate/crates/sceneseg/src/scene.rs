//! Domain types for frames, hands, objects and the object catalog.
//!
//! Everything here is an immutable value after construction; downstream
//! stages share frames freely across threads.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Point3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel id used for "no object" in encoded feature vectors. Never
/// assigned to a real hand or object.
pub const NONE_ID: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectKind {
    Hand,
    Object,
}

/// Identity of a tracked video object (a hand or a manipulable object).
///
/// Ids are small positive integers, unique per kind within a catalog;
/// 0 is reserved as the NONE sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VideoObjectId {
    pub kind: ObjectKind,
    pub id: u32,
}

impl VideoObjectId {
    pub fn hand(id: u32) -> Self {
        assert!(id != NONE_ID, "id 0 is the reserved NONE sentinel");
        Self { kind: ObjectKind::Hand, id }
    }

    pub fn object(id: u32) -> Self {
        assert!(id != NONE_ID, "id 0 is the reserved NONE sentinel");
        Self { kind: ObjectKind::Object, id }
    }

    pub fn is_hand(&self) -> bool {
        self.kind == ObjectKind::Hand
    }
}

impl fmt::Display for VideoObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ObjectKind::Hand => write!(f, "hand:{}", self.id),
            ObjectKind::Object => write!(f, "object:{}", self.id),
        }
    }
}

/// Whether a stream lives in the full 3D workspace or on a plane.
///
/// In planar mode all z components are forced to 0 on ingestion and object
/// orientations are single angles about the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SceneMode {
    #[default]
    #[serde(rename = "3d")]
    Spatial,
    #[serde(rename = "2d")]
    Planar,
}

/// Object orientation: a unit quaternion in 3D mode, a planar angle (radians
/// about +z) in 2D mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orientation {
    Planar(f64),
    Spatial(UnitQuaternion<f64>),
}

impl Orientation {
    pub fn identity(mode: SceneMode) -> Self {
        match mode {
            SceneMode::Planar => Orientation::Planar(0.0),
            SceneMode::Spatial => Orientation::Spatial(UnitQuaternion::identity()),
        }
    }

    /// Rotate a vector from the local frame into the world frame.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Orientation::Planar(a) => {
                let (s, c) = a.sin_cos();
                Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
            }
            Orientation::Spatial(q) => q.transform_vector(v),
        }
    }

    /// Rotate a world-frame vector into the local frame.
    pub fn rotate_inverse(&self, v: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Orientation::Planar(a) => {
                let (s, c) = a.sin_cos();
                Vector3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
            }
            Orientation::Spatial(q) => q.inverse_transform_vector(v),
        }
    }
}

/// One observed hand: its id and the ordered landmark positions in meters,
/// world frame. Interaction point and reference landmark indices come from
/// the catalog's hand schema.
#[derive(Debug, Clone, PartialEq)]
pub struct HandObservation {
    pub id: VideoObjectId,
    pub landmarks: Vec<Point3<f64>>,
}

/// One observed object: centroid position and orientation. Interaction
/// points are defined in the object frame by the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectObservation {
    pub id: VideoObjectId,
    pub position: Point3<f64>,
    pub orientation: Orientation,
}

/// One timestamped observation of every hand and object in the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrame {
    pub timestamp: f64,
    pub hands: Vec<HandObservation>,
    pub objects: Vec<ObjectObservation>,
}

impl SceneFrame {
    pub fn hand(&self, id: VideoObjectId) -> Option<&HandObservation> {
        self.hands.iter().find(|h| h.id == id)
    }

    pub fn object(&self, id: VideoObjectId) -> Option<&ObjectObservation> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Force the frame onto the z = 0 plane (planar mode ingestion).
    pub fn flatten(&mut self) {
        for h in &mut self.hands {
            for p in &mut h.landmarks {
                p.z = 0.0;
            }
        }
        for o in &mut self.objects {
            o.position.z = 0.0;
        }
    }
}

/// Per-frame kinematic state of one tracked point.
///
/// `speed` is clamped to exactly 0 below the velocity dead-zone, in which
/// case the direction is undefined and `velocity` is zeroed as well.
/// `accel_sign` is the sign of the tangential acceleration with a dead-zone:
/// 0 iff |tangential_accel| <= eps_alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub velocity: Vector3<f64>,
    pub speed: f64,
    pub tangential_accel: f64,
    pub accel_sign: i8,
}

impl KinematicState {
    pub fn at_rest() -> Self {
        Self { velocity: Vector3::zeros(), speed: 0.0, tangential_accel: 0.0, accel_sign: 0 }
    }
}

/// Catalog entry for one object type.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub name: String,
    /// Interaction points in the object's own frame, meters.
    pub interaction_points: Vec<Point3<f64>>,
}

/// Catalog entry describing a hand's landmark layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HandSchema {
    pub landmark_count: usize,
    /// Landmark indices designating the hand's interaction points
    /// (by default the fingertips of the three middle fingers).
    pub interaction_point_indices: Vec<usize>,
    /// Landmark index where hand kinematics are measured
    /// (the middle finger knuckle).
    pub reference_landmark: usize,
}

impl Default for HandSchema {
    fn default() -> Self {
        // 21-landmark hand convention: index/middle/ring fingertips are
        // 8, 12, 16 and the middle finger knuckle is 9.
        Self { landmark_count: 21, interaction_point_indices: vec![8, 12, 16], reference_landmark: 9 }
    }
}

/// Global pipeline parameters, normally loaded from the catalog file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub mode: SceneMode,
    /// Contact threshold on the minimum interaction point distance, meters.
    pub d_contact: f64,
    /// Speed dead-zone, m/s. Speeds below are clamped to exactly 0.
    pub eps_v: f64,
    /// Acceleration dead-zone, m/s^2, for the sign feature.
    pub eps_alpha: f64,
    /// Centered moving-average width for position smoothing, odd.
    pub smoothing_window: usize,
    /// Structuring element length of the opening-closing filter, odd.
    pub filter_length: usize,
    /// Interaction chain depth D; all compared corpora must share it.
    pub chain_depth: usize,
    /// Elevation quantization bins.
    pub theta_bins: u32,
    /// Azimuth quantization bins.
    pub phi_bins: u32,
    /// Maximum allowed timestamp gap between consecutive frames, seconds.
    pub max_time_gap: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mode: SceneMode::Spatial,
            d_contact: 0.02,
            eps_v: 0.01,
            eps_alpha: 0.05,
            smoothing_window: 5,
            filter_length: 5,
            chain_depth: 2,
            theta_bins: 4,
            phi_bins: 8,
            max_time_gap: None,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if self.smoothing_window == 0 || self.smoothing_window % 2 == 0 {
            return Err(Error::InvalidCatalog(format!(
                "smoothing_window must be odd and >= 1, got {}",
                self.smoothing_window
            )));
        }
        if self.filter_length == 0 || self.filter_length % 2 == 0 {
            return Err(Error::EvenFilterLength(self.filter_length));
        }
        if self.chain_depth == 0 {
            return Err(Error::InvalidCatalog("chain_depth must be >= 1".into()));
        }
        if self.theta_bins < 2 || self.phi_bins < 2 {
            return Err(Error::InvalidCatalog("quantization needs at least 2 bins".into()));
        }
        if !(self.d_contact > 0.0) || !(self.eps_v >= 0.0) || !(self.eps_alpha >= 0.0) {
            return Err(Error::InvalidCatalog("thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Catalog of every hand and object that may appear in a stream, plus the
/// global parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectCatalog {
    pub objects: BTreeMap<u32, ObjectSpec>,
    pub hands: BTreeMap<u32, HandSchema>,
    pub params: Params,
}

impl ObjectCatalog {
    pub fn object_spec(&self, id: VideoObjectId) -> Option<&ObjectSpec> {
        (id.kind == ObjectKind::Object).then(|| self.objects.get(&id.id)).flatten()
    }

    pub fn hand_schema(&self, id: VideoObjectId) -> Option<&HandSchema> {
        (id.kind == ObjectKind::Hand).then(|| self.hands.get(&id.id)).flatten()
    }

    /// Consistency check of the catalog itself (not of a frame).
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.objects.contains_key(&NONE_ID) || self.hands.contains_key(&NONE_ID) {
            return Err(Error::InvalidCatalog("id 0 is the reserved NONE sentinel".into()));
        }
        for (id, spec) in &self.objects {
            if spec.interaction_points.is_empty() {
                return Err(Error::InvalidCatalog(format!(
                    "object {id} ({}) has no interaction points",
                    spec.name
                )));
            }
        }
        for (id, schema) in &self.hands {
            if schema.interaction_point_indices.is_empty() {
                return Err(Error::InvalidCatalog(format!("hand {id} has no interaction points")));
            }
            let mut seen = schema.interaction_point_indices.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != schema.interaction_point_indices.len() {
                return Err(Error::InvalidCatalog(format!(
                    "hand {id} has duplicate interaction point indices"
                )));
            }
            for &ix in &schema.interaction_point_indices {
                if ix >= schema.landmark_count {
                    return Err(Error::InvalidCatalog(format!(
                        "hand {id} interaction point index {ix} out of range"
                    )));
                }
            }
            if schema.reference_landmark >= schema.landmark_count {
                return Err(Error::InvalidCatalog(format!(
                    "hand {id} reference landmark out of range"
                )));
            }
        }
        Ok(())
    }
}

/// One rule violation found while validating a frame against a catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    UnknownId { id: VideoObjectId },
    DuplicateId { id: VideoObjectId },
    LandmarkCountMismatch { id: VideoObjectId, expected: usize, got: usize },
    InvalidOrientation { id: VideoObjectId, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownId { id } => write!(f, "unknown id {id}"),
            Violation::DuplicateId { id } => write!(f, "duplicate id {id}"),
            Violation::LandmarkCountMismatch { id, expected, got } => {
                write!(f, "{id}: expected {expected} landmarks, got {got}")
            }
            Violation::InvalidOrientation { id, detail } => {
                write!(f, "{id}: invalid orientation ({detail})")
            }
        }
    }
}

/// Report produced by [`validate_frame`]; empty iff the frame is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        self.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
    }
}

const QUAT_UNIT_TOL: f64 = 1e-9;

/// Check one frame against the catalog. Every violation is reported; the
/// report is empty iff the frame is valid.
pub fn validate_frame(frame: &SceneFrame, catalog: &ObjectCatalog) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen: Vec<VideoObjectId> = Vec::new();

    for hand in &frame.hands {
        if seen.contains(&hand.id) {
            report.violations.push(Violation::DuplicateId { id: hand.id });
        }
        seen.push(hand.id);
        match catalog.hand_schema(hand.id) {
            None => report.violations.push(Violation::UnknownId { id: hand.id }),
            Some(schema) => {
                if hand.landmarks.len() != schema.landmark_count {
                    report.violations.push(Violation::LandmarkCountMismatch {
                        id: hand.id,
                        expected: schema.landmark_count,
                        got: hand.landmarks.len(),
                    });
                }
            }
        }
    }

    for obj in &frame.objects {
        if seen.contains(&obj.id) {
            report.violations.push(Violation::DuplicateId { id: obj.id });
        }
        seen.push(obj.id);
        if catalog.object_spec(obj.id).is_none() {
            report.violations.push(Violation::UnknownId { id: obj.id });
        }
        match (&obj.orientation, catalog.params.mode) {
            (Orientation::Spatial(q), SceneMode::Spatial) => {
                // UnitQuaternion renormalizes on construction; this guards
                // hand-built values that bypassed the wire path.
                let err = (q.as_ref().norm() - 1.0).abs();
                if err > QUAT_UNIT_TOL {
                    report.violations.push(Violation::InvalidOrientation {
                        id: obj.id,
                        detail: format!("quaternion norm off by {err:.2e}"),
                    });
                }
            }
            (Orientation::Planar(a), SceneMode::Planar) => {
                if !a.is_finite() {
                    report.violations.push(Violation::InvalidOrientation {
                        id: obj.id,
                        detail: "non-finite planar angle".into(),
                    });
                }
            }
            (Orientation::Planar(_), SceneMode::Spatial) => {
                report.violations.push(Violation::InvalidOrientation {
                    id: obj.id,
                    detail: "planar angle in a 3d stream".into(),
                });
            }
            (Orientation::Spatial(_), SceneMode::Planar) => {
                report.violations.push(Violation::InvalidOrientation {
                    id: obj.id,
                    detail: "quaternion in a 2d stream".into(),
                });
            }
        }
    }

    report
}
