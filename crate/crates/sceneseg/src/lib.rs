//! Scene-graph based motion and context features for hand-object
//! interaction streams, with event-based segmentation into a four-level
//! hierarchy (ERU, Interaction Unit, activity, job), DTW clustering of IUs,
//! and online anomaly detection against a trained nominal job model.

pub mod anomaly;
pub mod cluster;
pub mod error;
pub mod features;
pub mod graph;
pub mod io;
pub mod kinematics;
pub mod online;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod scene;
pub mod segment;
pub mod similarity;

pub use error::{Error, Result};
