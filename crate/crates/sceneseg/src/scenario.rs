//! Deterministic synthetic scenario generation.
//!
//! Each template scripts a manual task as a list of timed phases: the hand
//! follows minimum-jerk segments or oscillations, grasped objects ride along,
//! everything else rests where it was left. Frames are sampled at a fixed
//! rate, optionally rigidly transformed (drilling layouts c1/c2/c3) and
//! perturbed with seeded Gaussian position noise. A sidecar with ground-truth
//! IU and activity spans is derived from the clean geometry by a brute-force
//! contact scan against the script's declared contact sets, independently of
//! the scene-graph pipeline.
//!
//! Geometry conventions: meters, z up, tabletop at z = 0. Handled objects
//! carry a handle interaction point above and a base point below their
//! centroid, so a gripping hand never comes near the support the object
//! rests on. Travel directions run along a lane rotated 22.5 degrees from
//! the x axis, which keeps straight-line motion in the middle of an azimuth
//! quantization bin.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_8;
use std::str::FromStr;

use nalgebra::{Point3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::min_interaction_distance;
use crate::scene::{
    HandObservation, HandSchema, ObjectCatalog, ObjectObservation, ObjectSpec, Orientation,
    Params, SceneFrame, VideoObjectId,
};

pub const HAND_ID: u32 = 1;
pub const PROFILE_ID: u32 = 2;
pub const BOX_ID: u32 = 3;
pub const METER_ID: u32 = 4;
pub const CORNER_ID: u32 = 5;
pub const POLISHER_ID: u32 = 6;
pub const BRICK_ID: u32 = 7;
pub const DRILL_ID: u32 = 8;
pub const STORAGE_ID: u32 = 9;
pub const FIRST_TOOL_ID: u32 = 10;

/// Vertical offset from an object's centroid to the gripping hand origin.
const GRIP_RISE: f64 = 0.028;
/// Handle and base interaction points sit this far above/below the centroid.
const HANDLE_RISE: f64 = 0.02;
/// Hover height for pick-and-place approaches.
const HOVER: f64 = 0.10;
/// Relative phase duration jitter (seeded per stream).
const DURATION_JITTER: f64 = 0.08;
/// Surface-work oscillation amplitude: wide and fast enough that the
/// direction feature alternates in runs well above the filter length while
/// staying on the brick's contact grid.
const OSC_AMPLITUDE: f64 = 0.032;

fn lane_u() -> Vector3<f64> {
    Vector3::new(FRAC_PI_8.cos(), FRAC_PI_8.sin(), 0.0)
}

fn lane_v() -> Vector3<f64> {
    Vector3::new(-FRAC_PI_8.sin(), FRAC_PI_8.cos(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    BoxFilling,
    Boxing,
    Measuring,
    Assembly,
    Disassembly,
    Polishing,
    Drilling,
    PolishMeasureJob,
}

impl Template {
    pub fn name(&self) -> &'static str {
        match self {
            Template::BoxFilling => "box_filling",
            Template::Boxing => "boxing",
            Template::Measuring => "measuring",
            Template::Assembly => "assembly",
            Template::Disassembly => "disassembly",
            Template::Polishing => "polishing",
            Template::Drilling => "drilling",
            Template::PolishMeasureJob => "polish_measure_job",
        }
    }

    pub fn all() -> &'static [Template] {
        &[
            Template::BoxFilling,
            Template::Boxing,
            Template::Measuring,
            Template::Assembly,
            Template::Disassembly,
            Template::Polishing,
            Template::Drilling,
            Template::PolishMeasureJob,
        ]
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::all()
            .iter()
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| Error::UnknownTemplate(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlawMode {
    HaltHalfway,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlawSpec {
    pub activity: usize,
    pub iu: usize,
    pub mode: FlawMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub template: Template,
    /// Object layout variant; "default", or "c1"/"c2"/"c3" for drilling.
    #[serde(default = "default_layout")]
    pub layout: String,
    /// Tool count for box_filling; must be 1 for the other templates.
    #[serde(default)]
    pub repetitions: usize,
    /// Gaussian position noise amplitude, meters.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub flaw: Option<FlawSpec>,
}

fn default_layout() -> String {
    "default".into()
}

fn default_fps() -> f64 {
    30.0
}

impl ScenarioSpec {
    pub fn new(template: Template) -> Self {
        Self {
            template,
            layout: default_layout(),
            repetitions: if template == Template::BoxFilling { 5 } else { 1 },
            noise: 0.0,
            seed: 0,
            fps: default_fps(),
            flaw: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarIu {
    pub start: usize,
    pub end: usize,
    pub xc: Vec<i64>,
    pub activity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarActivity {
    pub start: usize,
    pub end: usize,
    pub anchor: i64,
}

/// Ground truth emitted next to every generated stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub template: String,
    pub layout: String,
    pub seed: u64,
    pub noise: f64,
    pub fps: f64,
    pub repetitions: usize,
    pub flaw: Option<FlawSpec>,
    pub ius: Vec<SidecarIu>,
    pub activities: Vec<SidecarActivity>,
}

pub struct GeneratedScenario {
    pub frames: Vec<SceneFrame>,
    pub catalog: ObjectCatalog,
    pub sidecar: Sidecar,
}

/// Shared catalog for every template: stable ids across scenarios so pooled
/// context vectors are comparable.
pub fn scenario_catalog() -> ObjectCatalog {
    let mut catalog = ObjectCatalog::default();
    // Synthetic motion scale: the speed dead-zone clamps resting objects to
    // exactly zero under millimeter noise (which also pins their
    // acceleration sign to zero), and an odd elevation bin count keeps
    // horizontal motion in the middle of a bin instead of on a bin edge.
    catalog.params = Params { eps_v: 0.04, theta_bins: 3, ..Params::default() };
    catalog.hands.insert(HAND_ID, HandSchema::default());

    let handled = |name: &str| ObjectSpec {
        name: name.into(),
        interaction_points: vec![
            Point3::new(0.0, 0.0, HANDLE_RISE),
            Point3::new(0.0, 0.0, -HANDLE_RISE),
        ],
    };
    let marker = |name: &str| ObjectSpec {
        name: name.into(),
        interaction_points: vec![Point3::origin()],
    };

    catalog.objects.insert(PROFILE_ID, handled("profile"));
    catalog.objects.insert(METER_ID, marker("meter"));
    catalog.objects.insert(CORNER_ID, marker("corner_joint"));
    catalog.objects.insert(POLISHER_ID, handled("polisher"));
    catalog.objects.insert(DRILL_ID, handled("drill"));

    // brick: grid of surface points on top plus a base point, so a sliding
    // polisher or drill keeps contact across its oscillation
    let mut brick_ips = Vec::new();
    for ix in -4i32..=4 {
        for iy in -4i32..=4 {
            brick_ips.push(Point3::new(ix as f64 * 0.008, iy as f64 * 0.008, HANDLE_RISE));
        }
    }
    brick_ips.push(Point3::new(0.0, 0.0, -HANDLE_RISE));
    catalog
        .objects
        .insert(BRICK_ID, ObjectSpec { name: "black_brick".into(), interaction_points: brick_ips });

    let v = lane_v();
    let slots = |spacing: f64| -> Vec<Point3<f64>> {
        (-2i32..=2).map(|k| Point3::from(v * (k as f64 * spacing))).collect()
    };
    catalog
        .objects
        .insert(BOX_ID, ObjectSpec { name: "box".into(), interaction_points: slots(0.08) });
    catalog.objects.insert(
        STORAGE_ID,
        ObjectSpec { name: "storage_area".into(), interaction_points: slots(0.10) },
    );
    for k in 0..5u32 {
        catalog.objects.insert(FIRST_TOOL_ID + k, handled(&format!("tool_{}", k + 1)));
    }
    catalog
}

/// Fixed landmark offsets of the synthetic 21-point hand, relative to the
/// hand origin (the grip point). Index 8/12/16 are the interaction
/// fingertips, index 9 the kinematic reference knuckle.
fn hand_offsets() -> Vec<Vector3<f64>> {
    let u = lane_u();
    let v = lane_v();
    let z = Vector3::z();
    let mut offsets = vec![Vector3::zeros(); 21];
    for (i, o) in offsets.iter_mut().enumerate() {
        // palm / wrist filler landmarks fan out behind and above the grip
        let spread = (i as f64 - 10.0) / 10.0;
        *o = u * (-0.04 - 0.01 * spread) + v * (0.03 * spread) + z * (0.05 + 0.012 * spread);
    }
    offsets[8] = v * 0.010;
    offsets[12] = Vector3::zeros();
    offsets[16] = v * -0.010;
    offsets[9] = z * 0.060;
    offsets
}

#[derive(Debug, Clone)]
enum HandMotion {
    Hold,
    MinJerkTo(Point3<f64>),
    /// Displacement dir * amplitude * (1 - cos(2 pi cycles tau)) / 2.
    Oscillate { dir: Vector3<f64>, amplitude: f64, cycles: f64 },
}

#[derive(Debug, Clone)]
struct Phase {
    duration: f64,
    motion: HandMotion,
    held: Option<u32>,
    /// Contact pairs (catalog ids, hand included) once this phase settles.
    contacts: Vec<(u32, u32)>,
    xc: Vec<i64>,
    activity: Option<usize>,
}

struct Script {
    initial: BTreeMap<u32, Point3<f64>>,
    hand_start: Point3<f64>,
    phases: Vec<Phase>,
}

fn pair(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Running contact-set tracker for script declarations.
#[derive(Clone, Default)]
struct Contacts {
    set: Vec<(u32, u32)>,
}

impl Contacts {
    fn with(&self, add: &[(u32, u32)]) -> Vec<(u32, u32)> {
        let mut out = self.set.clone();
        for &(a, b) in add {
            let p = pair(a, b);
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out.sort_unstable();
        out
    }

    fn commit(&mut self, set: &[(u32, u32)]) {
        self.set = set.to_vec();
        self.set.sort_unstable();
    }
}

fn grip(centroid: Point3<f64>) -> Point3<f64> {
    centroid + Vector3::z() * GRIP_RISE
}

fn rest_centroid(base: Point3<f64>) -> Point3<f64> {
    base + Vector3::z() * HANDLE_RISE
}

/// Script builder helper: pick an object up at its current place, carry it
/// to `target_centroid`, settle, then move the free hand to `away`.
///
/// Appends: lift, travel, descend (contact with `target` once close),
/// settle, release. The caller handles the grasp phase and declarations
/// around it.
#[allow(clippy::too_many_arguments)]
fn push_carry(
    phases: &mut Vec<Phase>,
    standing: &mut Contacts,
    held: u32,
    from_centroid: Point3<f64>,
    target_centroid: Point3<f64>,
    target_contact: Option<(u32, u32)>,
    away_to: Option<Point3<f64>>,
    activity: usize,
    hand_anchor_xc: Vec<i64>,
    placed_xc: Vec<i64>,
) {
    let carry_set = standing.set.clone();
    // lift
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(from_centroid) + Vector3::z() * HOVER),
        held: Some(held),
        contacts: Contacts { set: carry_set.clone() }.with(&[(HAND_ID, held)]),
        xc: hand_anchor_xc.clone(),
        activity: Some(activity),
    });
    // travel above the target
    phases.push(Phase {
        duration: 0.7,
        motion: HandMotion::MinJerkTo(grip(target_centroid) + Vector3::z() * HOVER),
        held: Some(held),
        contacts: Contacts { set: carry_set.clone() }.with(&[(HAND_ID, held)]),
        xc: hand_anchor_xc.clone(),
        activity: Some(activity),
    });
    // descend into contact
    let mut placed_set = Contacts { set: carry_set };
    if let Some(c) = target_contact {
        let with_target = placed_set.with(&[c]);
        placed_set.commit(&with_target);
    }
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(target_centroid)),
        held: Some(held),
        contacts: placed_set.with(&[(HAND_ID, held)]),
        xc: placed_xc.clone(),
        activity: Some(activity),
    });
    // settle at rest while still gripping
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::Hold,
        held: None,
        contacts: placed_set.with(&[(HAND_ID, held)]),
        xc: placed_xc,
        activity: Some(activity),
    });
    standing.commit(&placed_set.set);
    if let Some(away) = away_to {
        phases.push(Phase {
            duration: 0.6,
            motion: HandMotion::MinJerkTo(away),
            held: None,
            contacts: standing.set.clone(),
            xc: vec![HAND_ID as i64, 0, 0, 0],
            activity: Some(activity),
        });
    }
}

fn xc(anchor: u32, from: u32, to: u32) -> Vec<i64> {
    vec![HAND_ID as i64, anchor as i64, from as i64, to as i64]
}

fn xc1(anchor: u32) -> Vec<i64> {
    vec![HAND_ID as i64, anchor as i64, 0, 0]
}

/// One pick-and-place activity: grasp at rest, carry, place, release.
fn single_place_script(target_id: u32, target_point: Point3<f64>, offset: Vector3<f64>) -> Script {
    let profile_home = rest_centroid(Point3::origin());
    let target_centroid = rest_centroid(target_point + offset);
    let mut phases = Vec::new();
    let mut standing = Contacts::default();

    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::Hold,
        held: None,
        contacts: standing.with(&[(HAND_ID, PROFILE_ID)]),
        xc: xc1(PROFILE_ID),
        activity: Some(0),
    });
    push_carry(
        &mut phases,
        &mut standing,
        PROFILE_ID,
        profile_home,
        target_centroid,
        Some((PROFILE_ID, target_id)),
        Some(grip(profile_home) + Vector3::z() * HOVER),
        0,
        xc1(PROFILE_ID),
        xc(PROFILE_ID, PROFILE_ID, target_id),
    );

    let mut initial = BTreeMap::new();
    initial.insert(PROFILE_ID, profile_home);
    initial.insert(target_id, Point3::from(target_point.coords));
    Script { initial, hand_start: grip(profile_home), phases }
}

fn boxing_script() -> Script {
    single_place_script(BOX_ID, Point3::from(lane_u() * 0.35), Vector3::zeros())
}

fn measuring_script() -> Script {
    // the profile lands next to the meter, 6 mm off its marker point
    single_place_script(
        METER_ID,
        Point3::from(lane_u() * 0.35 + lane_v() * 0.15),
        lane_v() * 0.006,
    )
}

fn assembly_script() -> Script {
    single_place_script(CORNER_ID, Point3::from(lane_u() * 0.35 - lane_v() * 0.15), Vector3::zeros())
}

fn disassembly_script() -> Script {
    let corner = Point3::from(lane_u() * 0.35 - lane_v() * 0.15);
    let interlocked = rest_centroid(corner);
    let home_hover = grip(rest_centroid(Point3::origin())) + Vector3::z() * HOVER;
    let mut phases = Vec::new();

    // gripping the already interlocked assembly
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::Hold,
        held: None,
        contacts: vec![pair(HAND_ID, PROFILE_ID), pair(PROFILE_ID, CORNER_ID)],
        xc: xc(PROFILE_ID, PROFILE_ID, CORNER_ID),
        activity: Some(0),
    });
    // pull straight up until the pieces separate
    phases.push(Phase {
        duration: 0.5,
        motion: HandMotion::MinJerkTo(grip(interlocked) + Vector3::z() * HOVER),
        held: Some(PROFILE_ID),
        contacts: vec![pair(HAND_ID, PROFILE_ID)],
        xc: xc1(PROFILE_ID),
        activity: Some(0),
    });
    // move away while holding
    phases.push(Phase {
        duration: 0.8,
        motion: HandMotion::MinJerkTo(home_hover),
        held: Some(PROFILE_ID),
        contacts: vec![pair(HAND_ID, PROFILE_ID)],
        xc: xc1(PROFILE_ID),
        activity: Some(0),
    });

    let mut initial = BTreeMap::new();
    initial.insert(PROFILE_ID, interlocked);
    initial.insert(CORNER_ID, corner);
    Script { initial, hand_start: grip(interlocked), phases }
}

/// Grasp a handled tool, oscillate it on the brick surface, lift away.
fn surface_work_script(tool_id: u32, osc_dir: Vector3<f64>, cycles: f64, duration: f64) -> Script {
    let tool_home = rest_centroid(Point3::from(lane_v() * 0.15));
    let brick_centroid = rest_centroid(Point3::from(lane_u() * 0.35));
    // the tool base rides on the brick's top surface
    let work_centroid = brick_centroid + Vector3::z() * (2.0 * HANDLE_RISE);
    let mut phases = Vec::new();

    let on_brick = vec![pair(HAND_ID, tool_id), pair(tool_id, BRICK_ID)];
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::Hold,
        held: None,
        contacts: vec![pair(HAND_ID, tool_id)],
        xc: xc1(tool_id),
        activity: Some(0),
    });
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(tool_home) + Vector3::z() * HOVER),
        held: Some(tool_id),
        contacts: vec![pair(HAND_ID, tool_id)],
        xc: xc1(tool_id),
        activity: Some(0),
    });
    phases.push(Phase {
        duration: 0.7,
        motion: HandMotion::MinJerkTo(grip(work_centroid) + Vector3::z() * HOVER),
        held: Some(tool_id),
        contacts: vec![pair(HAND_ID, tool_id)],
        xc: xc1(tool_id),
        activity: Some(0),
    });
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(work_centroid)),
        held: Some(tool_id),
        contacts: on_brick.clone(),
        xc: xc(tool_id, tool_id, BRICK_ID),
        activity: Some(0),
    });
    phases.push(Phase {
        duration,
        motion: HandMotion::Oscillate { dir: osc_dir, amplitude: OSC_AMPLITUDE, cycles },
        held: Some(tool_id),
        contacts: on_brick,
        xc: xc(tool_id, tool_id, BRICK_ID),
        activity: Some(0),
    });
    phases.push(Phase {
        duration: 0.6,
        motion: HandMotion::MinJerkTo(grip(work_centroid) + Vector3::z() * HOVER),
        held: Some(tool_id),
        contacts: vec![pair(HAND_ID, tool_id)],
        xc: xc1(tool_id),
        activity: Some(0),
    });

    let mut initial = BTreeMap::new();
    initial.insert(tool_id, tool_home);
    initial.insert(BRICK_ID, brick_centroid);
    Script { initial, hand_start: grip(tool_home), phases }
}

fn polishing_script() -> Script {
    surface_work_script(POLISHER_ID, lane_u(), 4.0, 3.3)
}

fn drilling_script() -> Script {
    surface_work_script(DRILL_ID, lane_v(), 6.0, 5.0)
}

fn box_filling_script(tools: usize) -> Script {
    let v = lane_v();
    let storage = Point3::origin();
    let box_pos = Point3::from(lane_u() * 0.45);
    let storage_slot = |k: usize| storage + v * ((k as f64 - 2.0) * 0.10);
    let box_slot = |k: usize| box_pos + v * ((k as f64 - 2.0) * 0.08);

    let mut initial = BTreeMap::new();
    initial.insert(STORAGE_ID, storage);
    initial.insert(BOX_ID, box_pos);
    let mut standing = Contacts::default();
    let mut std_set = Vec::new();
    for k in 0..tools {
        let id = FIRST_TOOL_ID + k as u32;
        initial.insert(id, rest_centroid(storage_slot(k)));
        std_set.push(pair(id, STORAGE_ID));
    }
    standing.commit(&std_set);

    let mut phases = Vec::new();
    for k in 0..tools {
        let id = FIRST_TOOL_ID + k as u32;
        let from = rest_centroid(storage_slot(k));
        let to = rest_centroid(box_slot(k));
        phases.push(Phase {
            duration: 0.4,
            motion: HandMotion::Hold,
            held: None,
            contacts: standing.with(&[(HAND_ID, id)]),
            xc: xc(id, id, STORAGE_ID),
            activity: Some(k),
        });
        // leaving the storage drops the (tool, storage) contact
        let without = Contacts {
            set: standing.set.iter().copied().filter(|&p| p != pair(id, STORAGE_ID)).collect(),
        };
        standing.commit(&without.set);
        let away = if k + 1 < tools {
            grip(rest_centroid(storage_slot(k + 1)))
        } else {
            box_pos + v * 0.35 + Vector3::z() * 0.15
        };
        push_carry(
            &mut phases,
            &mut standing,
            id,
            from,
            to,
            Some((id, BOX_ID)),
            Some(away),
            k,
            xc1(id),
            xc(id, id, BOX_ID),
        );
    }

    Script { initial, hand_start: grip(rest_centroid(storage_slot(0))), phases }
}

fn polish_measure_script(flaw: Option<FlawSpec>) -> Result<Script> {
    let u = lane_u();
    let v = lane_v();
    let polisher_home = rest_centroid(Point3::origin());
    let brick_centroid = rest_centroid(Point3::from(u * 0.30));
    let work_centroid = brick_centroid + Vector3::z() * (2.0 * HANDLE_RISE);
    let polisher_drop = rest_centroid(Point3::from(u * 0.30 + v * 0.14));
    let meter = Point3::from(u * 0.30 + v * 0.20);
    let measure_centroid = rest_centroid(meter + v * 0.006);

    let mut polish_cycles = 6.0;
    let mut polish_duration = 4.8;
    let mut skip_measure = false;
    if let Some(f) = flaw {
        match (f.activity, f.iu, f.mode) {
            (0, 1, FlawMode::HaltHalfway) => {
                polish_cycles = 3.0;
                polish_duration = 2.4;
            }
            (1, 1, FlawMode::Skip) => skip_measure = true,
            _ => {
                return Err(Error::UnsupportedScenario(format!(
                    "polish_measure_job supports flaws (activity 0, iu 1, halt_halfway) \
                     and (activity 1, iu 1, skip); got ({}, {}, {:?})",
                    f.activity, f.iu, f.mode
                )))
            }
        }
    }

    let mut phases = vec![
        // activity I: polish the brick
        Phase {
            duration: 0.4,
            motion: HandMotion::Hold,
            held: None,
            contacts: vec![pair(HAND_ID, POLISHER_ID)],
            xc: xc1(POLISHER_ID),
            activity: Some(0),
        },
        Phase {
            duration: 0.4,
            motion: HandMotion::MinJerkTo(grip(polisher_home) + Vector3::z() * HOVER),
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID)],
            xc: xc1(POLISHER_ID),
            activity: Some(0),
        },
        Phase {
            duration: 0.6,
            motion: HandMotion::MinJerkTo(grip(work_centroid) + Vector3::z() * HOVER),
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID)],
            xc: xc1(POLISHER_ID),
            activity: Some(0),
        },
        Phase {
            duration: 0.4,
            motion: HandMotion::MinJerkTo(grip(work_centroid)),
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID), pair(POLISHER_ID, BRICK_ID)],
            xc: xc(POLISHER_ID, POLISHER_ID, BRICK_ID),
            activity: Some(0),
        },
        Phase {
            duration: polish_duration,
            motion: HandMotion::Oscillate { dir: u, amplitude: OSC_AMPLITUDE, cycles: polish_cycles },
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID), pair(POLISHER_ID, BRICK_ID)],
            xc: xc(POLISHER_ID, POLISHER_ID, BRICK_ID),
            activity: Some(0),
        },
        Phase {
            duration: 0.4,
            motion: HandMotion::MinJerkTo(grip(work_centroid) + Vector3::z() * HOVER),
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID)],
            xc: xc1(POLISHER_ID),
            activity: Some(0),
        },
        // park the polisher next to the brick
        Phase {
            duration: 0.6,
            motion: HandMotion::MinJerkTo(grip(polisher_drop)),
            held: Some(POLISHER_ID),
            contacts: vec![pair(HAND_ID, POLISHER_ID)],
            xc: xc1(POLISHER_ID),
            activity: Some(0),
        },
        // release and immediately regrasp the brick next door; the short
        // free-hand gap is below the persistence filter length
        Phase {
            duration: 0.3,
            motion: HandMotion::MinJerkTo(grip(brick_centroid)),
            held: None,
            contacts: vec![],
            xc: vec![HAND_ID as i64, 0, 0, 0],
            activity: Some(0),
        },
        // activity II: measure the brick
        Phase {
            duration: 0.4,
            motion: HandMotion::Hold,
            held: None,
            contacts: vec![pair(HAND_ID, BRICK_ID)],
            xc: xc1(BRICK_ID),
            activity: Some(1),
        },
    ];

    let measure_target = if skip_measure {
        // carry the brick somewhere short of the meter, clear of the
        // parked polisher
        rest_centroid(meter + u * 0.08 + v * -0.12)
    } else {
        measure_centroid
    };
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(brick_centroid) + Vector3::z() * HOVER),
        held: Some(BRICK_ID),
        contacts: vec![pair(HAND_ID, BRICK_ID)],
        xc: xc1(BRICK_ID),
        activity: Some(1),
    });
    phases.push(Phase {
        duration: 0.6,
        motion: HandMotion::MinJerkTo(grip(measure_target) + Vector3::z() * HOVER),
        held: Some(BRICK_ID),
        contacts: vec![pair(HAND_ID, BRICK_ID)],
        xc: xc1(BRICK_ID),
        activity: Some(1),
    });
    let placed_contacts = if skip_measure {
        vec![pair(HAND_ID, BRICK_ID)]
    } else {
        vec![pair(HAND_ID, BRICK_ID), pair(BRICK_ID, METER_ID)]
    };
    let placed_xc = if skip_measure { xc1(BRICK_ID) } else { xc(BRICK_ID, BRICK_ID, METER_ID) };
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::MinJerkTo(grip(measure_target)),
        held: Some(BRICK_ID),
        contacts: placed_contacts.clone(),
        xc: placed_xc.clone(),
        activity: Some(1),
    });
    phases.push(Phase {
        duration: 0.4,
        motion: HandMotion::Hold,
        held: None,
        contacts: placed_contacts,
        xc: placed_xc,
        activity: Some(1),
    });

    let mut initial = BTreeMap::new();
    initial.insert(POLISHER_ID, polisher_home);
    initial.insert(BRICK_ID, brick_centroid);
    initial.insert(METER_ID, meter);
    Ok(Script { initial, hand_start: grip(polisher_home), phases })
}

fn layout_transform(spec: &ScenarioSpec) -> Result<(UnitQuaternion<f64>, Vector3<f64>)> {
    match (spec.template, spec.layout.as_str()) {
        (_, "default") | (Template::Drilling, "c1") => {
            Ok((UnitQuaternion::identity(), Vector3::zeros()))
        }
        (Template::Drilling, "c2") => Ok((
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.7),
            Vector3::new(0.30, 0.20, 0.0),
        )),
        (Template::Drilling, "c3") => Ok((
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -1.3),
            Vector3::new(-0.25, 0.40, 0.0),
        )),
        (t, other) => Err(Error::UnsupportedScenario(format!(
            "layout '{other}' is not defined for template {}",
            t.name()
        ))),
    }
}

fn build_script(spec: &ScenarioSpec) -> Result<Script> {
    if spec.flaw.is_some() && spec.template != Template::PolishMeasureJob {
        return Err(Error::UnsupportedScenario(format!(
            "flaw injection is only scripted for polish_measure_job, not {}",
            spec.template.name()
        )));
    }
    match spec.template {
        Template::BoxFilling => {
            if !(1..=5).contains(&spec.repetitions) {
                return Err(Error::UnsupportedScenario(format!(
                    "box_filling supports 1..=5 tools, got {}",
                    spec.repetitions
                )));
            }
            Ok(box_filling_script(spec.repetitions))
        }
        other => {
            if spec.repetitions != 1 {
                return Err(Error::UnsupportedScenario(format!(
                    "{} is a single-run template; use distinct seeds for repetitions",
                    other.name()
                )));
            }
            match other {
                Template::Boxing => Ok(boxing_script()),
                Template::Measuring => Ok(measuring_script()),
                Template::Assembly => Ok(assembly_script()),
                Template::Disassembly => Ok(disassembly_script()),
                Template::Polishing => Ok(polishing_script()),
                Template::Drilling => Ok(drilling_script()),
                Template::PolishMeasureJob => polish_measure_script(spec.flaw),
                Template::BoxFilling => unreachable!(),
            }
        }
    }
}

fn minjerk(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Generate a frame stream plus its ground-truth sidecar.
///
/// The same spec (template, layout, repetitions, noise, seed, fps, flaw)
/// always produces the identical stream.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<GeneratedScenario> {
    if !(spec.fps > 0.0) {
        return Err(Error::UnsupportedScenario("fps must be positive".into()));
    }
    let catalog = scenario_catalog();
    let script = build_script(spec)?;
    let (rot, shift) = layout_transform(spec)?;

    // per-phase duration jitter, seeded; oscillation phases keep their
    // cadence so repetitions stay cycle-aligned
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let durations: Vec<f64> = script
        .phases
        .iter()
        .map(|p| {
            let jitter = 1.0 + DURATION_JITTER * jitter_rng.random_range(-1.0..1.0);
            match p.motion {
                HandMotion::Oscillate { .. } => p.duration,
                _ => p.duration * jitter,
            }
        })
        .collect();
    let total: f64 = durations.iter().sum();
    let frame_count = (total * spec.fps).floor() as usize;

    let offsets = hand_offsets();
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ NOISE_SEED_SALT);
    let normal = if spec.noise > 0.0 {
        Some(Normal::new(0.0, spec.noise).expect("positive std dev"))
    } else {
        None
    };

    // world state committed at phase boundaries
    let mut positions = script.initial.clone();
    let mut hand_pos = script.hand_start;
    let mut phase_ix = 0usize;
    let mut phase_start_t = 0.0;
    let mut phase_start_hand = hand_pos;

    let mut clean_frames: Vec<SceneFrame> = Vec::with_capacity(frame_count);
    let mut scan = ScanState::new(&script, &catalog);

    for i in 0..frame_count {
        let t = i as f64 / spec.fps;
        // advance to the phase containing t, committing world state
        while phase_ix + 1 < script.phases.len() && t >= phase_start_t + durations[phase_ix] {
            hand_pos = eval_hand(&script.phases[phase_ix], phase_start_hand, 1.0);
            if let Some(held) = script.phases[phase_ix].held {
                positions.insert(held, hand_pos - Vector3::z() * GRIP_RISE);
            }
            phase_start_t += durations[phase_ix];
            phase_ix += 1;
            phase_start_hand = hand_pos;
        }
        let phase = &script.phases[phase_ix];
        let tau = ((t - phase_start_t) / durations[phase_ix]).clamp(0.0, 1.0);
        let cur_hand = eval_hand(phase, phase_start_hand, tau);
        let mut cur_positions = positions.clone();
        if let Some(held) = phase.held {
            cur_positions.insert(held, cur_hand - Vector3::z() * GRIP_RISE);
        }

        // assemble the clean frame in the transformed layout
        let place = |p: &Point3<f64>| Point3::from(rot.transform_vector(&p.coords) + shift);
        let landmarks: Vec<Point3<f64>> =
            offsets.iter().map(|o| place(&(cur_hand + o))).collect();
        let frame = SceneFrame {
            timestamp: t,
            hands: vec![HandObservation { id: VideoObjectId::hand(HAND_ID), landmarks }],
            objects: cur_positions
                .iter()
                .map(|(&id, p)| ObjectObservation {
                    id: VideoObjectId::object(id),
                    position: place(p),
                    orientation: Orientation::Spatial(rot),
                })
                .collect(),
        };
        scan.observe(i, &frame);
        clean_frames.push(frame);
    }

    let sidecar = scan.into_sidecar(spec, frame_count, catalog.params.filter_length);

    // additive position noise on top of the clean frames
    let frames = match normal {
        None => clean_frames,
        Some(dist) => clean_frames
            .into_iter()
            .map(|mut frame| {
                for hand in &mut frame.hands {
                    for lm in &mut hand.landmarks {
                        for c in 0..3 {
                            lm[c] += dist.sample(&mut noise_rng);
                        }
                    }
                }
                for obj in &mut frame.objects {
                    for c in 0..3 {
                        obj.position[c] += dist.sample(&mut noise_rng);
                    }
                }
                frame
            })
            .collect(),
    };

    Ok(GeneratedScenario { frames, catalog, sidecar })
}

fn eval_hand(phase: &Phase, start: Point3<f64>, tau: f64) -> Point3<f64> {
    match &phase.motion {
        HandMotion::Hold => start,
        HandMotion::MinJerkTo(to) => start + (to - start) * minjerk(tau),
        HandMotion::Oscillate { dir, amplitude, cycles } => {
            let phase_angle = std::f64::consts::TAU * cycles * tau;
            start + dir * (amplitude * (1.0 - phase_angle.cos()) * 0.5)
        }
    }
}

/// Keeps the noise draws independent of the duration jitter draws.
const NOISE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Ground-truth contact scanner: brute-force interaction point distances on
/// the clean geometry, matched against the script's declared contact sets.
struct ScanState {
    declared: Vec<(Vec<(u32, u32)>, Vec<i64>, Option<usize>)>,
    pointer: usize,
    per_frame: Vec<usize>,
    hand_ips: Vec<usize>,
    catalog: ObjectCatalog,
}

impl ScanState {
    fn new(script: &Script, catalog: &ObjectCatalog) -> Self {
        // deduplicate consecutive identical declared sets
        let mut declared: Vec<(Vec<(u32, u32)>, Vec<i64>, Option<usize>)> = Vec::new();
        for p in &script.phases {
            let mut set = p.contacts.clone();
            set.sort_unstable();
            if declared.last().map(|(s, _, _)| s) != Some(&set) {
                declared.push((set, p.xc.clone(), p.activity));
            }
        }
        let hand_ips = catalog.hands[&HAND_ID].interaction_point_indices.clone();
        Self { declared, pointer: 0, per_frame: Vec::new(), hand_ips, catalog: catalog.clone() }
    }

    fn contact_set(&self, frame: &SceneFrame) -> Vec<(u32, u32)> {
        let mut ips: Vec<(u32, Vec<Point3<f64>>)> = Vec::new();
        let hand = &frame.hands[0];
        ips.push((HAND_ID, self.hand_ips.iter().map(|&ix| hand.landmarks[ix]).collect()));
        for obj in &frame.objects {
            let spec = &self.catalog.objects[&obj.id.id];
            ips.push((
                obj.id.id,
                crate::graph::world_interaction_points(obj, &spec.interaction_points),
            ));
        }
        let mut set = Vec::new();
        for i in 0..ips.len() {
            for j in i + 1..ips.len() {
                let d = min_interaction_distance(&ips[i].1, &ips[j].1).expect("non-empty ips");
                if d <= self.catalog.params.d_contact {
                    set.push(pair(ips[i].0, ips[j].0));
                }
            }
        }
        set.sort_unstable();
        set
    }

    fn observe(&mut self, frame_ix: usize, frame: &SceneFrame) {
        // transitions are monotone, so the first declared set at or after
        // the pointer that matches is the right one; a declared state may be
        // skipped entirely when it lasts less than one frame
        let set = self.contact_set(frame);
        let mut p = self.pointer;
        while p < self.declared.len() && self.declared[p].0 != set {
            p += 1;
        }
        if p == self.declared.len() {
            panic!(
                "scenario script inconsistency at frame {frame_ix}: contact set {set:?} matches \
                 no declared set at or after {:?}",
                self.declared[self.pointer].0
            );
        }
        self.pointer = p;
        self.per_frame.push(p);
    }

    fn into_sidecar(self, spec: &ScenarioSpec, frames: usize, filter_len: usize) -> Sidecar {
        // runs of equal ground-truth x_c
        let mut runs: Vec<(usize, usize, Vec<i64>, Option<usize>)> = Vec::new();
        for (i, &d) in self.per_frame.iter().enumerate() {
            let (_, xc, act) = &self.declared[d];
            match runs.last_mut() {
                Some((_, end, last_xc, _)) if last_xc == xc => *end = i + 1,
                _ => runs.push((i, i + 1, xc.clone(), *act)),
            }
        }
        // persistence: runs shorter than the filter length cannot form an
        // IU; absorb them into the preceding IU (or carry them forward at
        // the stream head), mirroring the opening-closing behaviour
        let mut ius: Vec<SidecarIu> = Vec::new();
        let mut pending_start: Option<usize> = None;
        for (start, end, xc, act) in runs {
            let start = pending_start.take().unwrap_or(start);
            if end - start < filter_len {
                match ius.last_mut() {
                    Some(prev) => prev.end = end,
                    None => pending_start = Some(start),
                }
                continue;
            }
            match ius.last_mut() {
                Some(prev) if prev.xc == xc => prev.end = end,
                _ => ius.push(SidecarIu { start, end, xc, activity: act }),
            }
        }
        debug_assert_eq!(ius.last().map(|iu| iu.end), Some(frames));

        let mut activities: Vec<SidecarActivity> = Vec::new();
        for iu in &ius {
            let Some(act) = iu.activity else { continue };
            if activities.len() == act {
                activities.push(SidecarActivity {
                    start: iu.start,
                    end: iu.end,
                    anchor: iu.xc.get(1).copied().unwrap_or(0),
                });
            } else if let Some(a) = activities.get_mut(act) {
                a.end = iu.end;
            }
        }

        Sidecar {
            template: spec.template.name().into(),
            layout: spec.layout.clone(),
            seed: spec.seed,
            noise: spec.noise,
            fps: spec.fps,
            repetitions: spec.repetitions,
            flaw: spec.flaw,
            ius,
            activities,
        }
    }
}
