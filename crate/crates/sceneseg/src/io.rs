//! Wire formats: JSON Lines frame streams, the JSON catalog, and the
//! versioned nominal model file.
//!
//! One frame per line:
//!
//! ```json
//! {"t":0.0,"hands":[{"id":1,"landmarks":[[x,y,z],...]}],
//!  "objects":[{"id":2,"position":[x,y,z],"orientation":[w,x,y,z]}]}
//! ```
//!
//! `orientation` is a unit quaternion `[w,x,y,z]` in 3D streams and a single
//! planar angle in 2D streams. Parsing is streaming and validates timestamp
//! monotonicity; frames round-trip losslessly.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{Point3, Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::anomaly::NominalJob;
use crate::error::{Error, Result};
use crate::scene::{
    HandObservation, HandSchema, ObjectCatalog, ObjectObservation, ObjectSpec, Orientation,
    Params, SceneFrame, VideoObjectId,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandRecord {
    pub id: u32,
    pub landmarks: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrientationRecord {
    Planar(f64),
    Quaternion([f64; 4]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: u32,
    pub position: [f64; 3],
    pub orientation: OrientationRecord,
}

/// One stream frame in the wire schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: f64,
    pub hands: Vec<HandRecord>,
    pub objects: Vec<ObjectRecord>,
}

const QUAT_WIRE_TOL: f64 = 1e-9;

impl FrameRecord {
    pub fn from_frame(frame: &SceneFrame) -> Self {
        Self {
            t: frame.timestamp,
            hands: frame
                .hands
                .iter()
                .map(|h| HandRecord {
                    id: h.id.id,
                    landmarks: h.landmarks.iter().map(|p| [p.x, p.y, p.z]).collect(),
                })
                .collect(),
            objects: frame
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id.id,
                    position: [o.position.x, o.position.y, o.position.z],
                    orientation: match o.orientation {
                        Orientation::Planar(a) => OrientationRecord::Planar(a),
                        Orientation::Spatial(q) => {
                            OrientationRecord::Quaternion([q.w, q.i, q.j, q.k])
                        }
                    },
                })
                .collect(),
        }
    }

    pub fn into_frame(self) -> Result<SceneFrame> {
        let hands = self
            .hands
            .into_iter()
            .map(|h| {
                if h.id == 0 {
                    return Err(Error::InvalidCatalog("hand id 0 is reserved".into()));
                }
                Ok(HandObservation {
                    id: VideoObjectId::hand(h.id),
                    landmarks: h.landmarks.iter().map(|&[x, y, z]| Point3::new(x, y, z)).collect(),
                })
            })
            .collect::<Result<_>>()?;
        let objects = self
            .objects
            .into_iter()
            .map(|o| {
                if o.id == 0 {
                    return Err(Error::InvalidCatalog("object id 0 is reserved".into()));
                }
                let orientation = match o.orientation {
                    OrientationRecord::Planar(a) => Orientation::Planar(a),
                    OrientationRecord::Quaternion([w, x, y, z]) => {
                        let q = Quaternion::new(w, x, y, z);
                        if (q.norm() - 1.0).abs() > QUAT_WIRE_TOL {
                            return Err(Error::InvalidRotation(format!(
                                "object {}: quaternion norm {}",
                                o.id,
                                q.norm()
                            )));
                        }
                        // keep the wire values bit-exact; the norm was
                        // checked above, renormalizing would break the
                        // lossless round-trip
                        Orientation::Spatial(UnitQuaternion::new_unchecked(q))
                    }
                };
                Ok(ObjectObservation {
                    id: VideoObjectId::object(o.id),
                    position: Point3::new(o.position[0], o.position[1], o.position[2]),
                    orientation,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SceneFrame { timestamp: self.t, hands, objects })
    }
}

/// Streaming frame reader over line-delimited records.
pub struct StreamReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    last_t: Option<f64>,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(reader: R) -> Self {
        Self { lines: reader.lines(), line_no: 0, last_t: None }
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<SceneFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<FrameRecord>(&line)
                .map_err(|e| Error::Parse { line: self.line_no, msg: e.to_string() })
                .and_then(FrameRecord::into_frame)
                .map_err(|e| match e {
                    e @ Error::Parse { .. } => e,
                    other => Error::Parse { line: self.line_no, msg: other.to_string() },
                });
            let frame = match parsed {
                Ok(f) => f,
                Err(e) => return Some(Err(e)),
            };
            if let Some(last) = self.last_t {
                if frame.timestamp <= last {
                    return Some(Err(Error::Parse {
                        line: self.line_no,
                        msg: format!("timestamp {} not after {}", frame.timestamp, last),
                    }));
                }
            }
            self.last_t = Some(frame.timestamp);
            return Some(Ok(frame));
        }
    }
}

/// Parse a whole stream into memory.
pub fn read_stream(reader: impl BufRead) -> Result<Vec<SceneFrame>> {
    StreamReader::new(reader).collect()
}

pub fn read_stream_file(path: &Path) -> Result<Vec<SceneFrame>> {
    read_stream(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Serialize frames as JSON Lines.
pub fn write_stream(frames: &[SceneFrame], mut writer: impl Write) -> Result<()> {
    for frame in frames {
        serde_json::to_writer(&mut writer, &FrameRecord::from_frame(frame))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn stream_to_string(frames: &[SceneFrame]) -> Result<String> {
    let mut buf = Vec::new();
    write_stream(frames, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogObjectEntry {
    id: u32,
    name: String,
    interaction_points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogHandEntry {
    id: u32,
    #[serde(default = "default_landmark_count")]
    landmark_count: usize,
    #[serde(default = "default_ip_indices")]
    interaction_point_indices: Vec<usize>,
    #[serde(default = "default_reference_landmark")]
    reference_landmark: usize,
}

fn default_landmark_count() -> usize {
    HandSchema::default().landmark_count
}

fn default_ip_indices() -> Vec<usize> {
    HandSchema::default().interaction_point_indices
}

fn default_reference_landmark() -> usize {
    HandSchema::default().reference_landmark
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    objects: Vec<CatalogObjectEntry>,
    hands: Vec<CatalogHandEntry>,
    #[serde(default)]
    params: Params,
}

pub fn catalog_from_json(json: &str) -> Result<ObjectCatalog> {
    let file: CatalogFile = serde_json::from_str(json)?;
    let mut catalog = ObjectCatalog { params: file.params, ..Default::default() };
    for o in file.objects {
        if o.id == 0 {
            return Err(Error::InvalidCatalog("object id 0 is reserved".into()));
        }
        if catalog
            .objects
            .insert(
                o.id,
                ObjectSpec {
                    name: o.name,
                    interaction_points: o
                        .interaction_points
                        .iter()
                        .map(|&[x, y, z]| Point3::new(x, y, z))
                        .collect(),
                },
            )
            .is_some()
        {
            return Err(Error::InvalidCatalog(format!("duplicate object id {}", o.id)));
        }
    }
    for h in file.hands {
        if h.id == 0 {
            return Err(Error::InvalidCatalog("hand id 0 is reserved".into()));
        }
        if catalog
            .hands
            .insert(
                h.id,
                HandSchema {
                    landmark_count: h.landmark_count,
                    interaction_point_indices: h.interaction_point_indices,
                    reference_landmark: h.reference_landmark,
                },
            )
            .is_some()
        {
            return Err(Error::InvalidCatalog(format!("duplicate hand id {}", h.id)));
        }
    }
    catalog.validate()?;
    Ok(catalog)
}

pub fn catalog_to_json(catalog: &ObjectCatalog) -> Result<String> {
    let file = CatalogFile {
        objects: catalog
            .objects
            .iter()
            .map(|(&id, spec)| CatalogObjectEntry {
                id,
                name: spec.name.clone(),
                interaction_points: spec
                    .interaction_points
                    .iter()
                    .map(|p| [p.x, p.y, p.z])
                    .collect(),
            })
            .collect(),
        hands: catalog
            .hands
            .iter()
            .map(|(&id, schema)| CatalogHandEntry {
                id,
                landmark_count: schema.landmark_count,
                interaction_point_indices: schema.interaction_point_indices.clone(),
                reference_landmark: schema.reference_landmark,
            })
            .collect(),
        params: catalog.params.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load_catalog(path: &Path) -> Result<ObjectCatalog> {
    catalog_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_catalog(catalog: &ObjectCatalog, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, catalog_to_json(catalog)?)?)
}

/// Merge a JSON object of parameter overrides into catalog params.
pub fn merge_params(params: &Params, overrides_json: &str) -> Result<Params> {
    let mut value = serde_json::to_value(params)?;
    let overrides: serde_json::Value = serde_json::from_str(overrides_json)?;
    let serde_json::Value::Object(map) = overrides else {
        return Err(Error::InvalidCatalog("--params must be a JSON object".into()));
    };
    let base = value.as_object_mut().expect("params serialize to an object");
    for (k, v) in map {
        if !base.contains_key(&k) {
            return Err(Error::InvalidCatalog(format!("unknown parameter '{k}'")));
        }
        base.insert(k, v);
    }
    let merged: Params = serde_json::from_value(value)?;
    merged.validate()?;
    Ok(merged)
}

const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    nominal: NominalJob,
}

pub fn model_to_json(nominal: &NominalJob) -> Result<String> {
    let file = ModelFile { version: MODEL_VERSION, nominal: nominal.clone() };
    Ok(serde_json::to_string(&file)?)
}

pub fn model_from_json(json: &str) -> Result<NominalJob> {
    let file: ModelFile = serde_json::from_str(json)?;
    if file.version != MODEL_VERSION {
        return Err(Error::ModelVersion(file.version));
    }
    if file.nominal.activities.is_empty() || file.nominal.activities.iter().any(|a| a.is_empty()) {
        return Err(Error::InvalidCatalog(
            "model file must hold at least one activity, each with at least one IU".into(),
        ));
    }
    if file.nominal.activities.iter().flatten().any(|iu| iu.threshold < 0.0) {
        return Err(Error::InvalidCatalog("model thresholds must be non-negative".into()));
    }
    Ok(file.nominal)
}

pub fn save_model(nominal: &NominalJob, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, model_to_json(nominal)?)?)
}

pub fn load_model(path: &Path) -> Result<NominalJob> {
    model_from_json(&std::fs::read_to_string(path)?)
}

/// Resolve ids to catalog names where known, for report labeling.
pub fn context_label(context: &[i64], catalog: &ObjectCatalog) -> String {
    let names: BTreeMap<i64, &str> =
        catalog.objects.iter().map(|(&id, spec)| (id as i64, spec.name.as_str())).collect();
    context
        .iter()
        .map(|&id| {
            if id == 0 {
                "-".to_string()
            } else {
                names.get(&id).map_or_else(|| id.to_string(), |n| n.to_string())
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}
