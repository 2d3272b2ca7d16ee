//! Python bindings.
//!
//! Thin wrappers over the sceneseg crate: sequences cross the boundary as
//! nested lists, larger artifacts (streams, catalogs, segmentations, models,
//! event logs) as JSON strings, matching the file formats of the CLI.
//!
//! Usage from Python:
//!
//!     import sceneseg_py as ss
//!     stream, sidecar, catalog = ss.simulate("box_filling", seed=7)
//!     report = ss.segment(stream, catalog)

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sceneseg::anomaly;
use sceneseg::cluster::{self, KmeansOptions};
use sceneseg::io;
use sceneseg::pipeline;
use sceneseg::scenario::{self, ScenarioSpec};
use sceneseg::segment::SegmentationResult;
use sceneseg::similarity::{self, MotionSequence};

fn err(e: sceneseg::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_sequence(rows: Vec<Vec<f64>>) -> PyResult<MotionSequence> {
    MotionSequence::from_rows(&rows).map_err(err)
}

fn to_sequences(seqs: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<MotionSequence>> {
    seqs.into_iter().map(to_sequence).collect()
}

fn parse_catalog(catalog_json: Option<&str>) -> PyResult<sceneseg::scene::ObjectCatalog> {
    match catalog_json {
        Some(json) => io::catalog_from_json(json).map_err(err),
        None => Ok(scenario::scenario_catalog()),
    }
}

fn parse_stream(stream_jsonl: &str) -> PyResult<Vec<sceneseg::scene::SceneFrame>> {
    io::read_stream(std::io::BufReader::new(stream_jsonl.as_bytes())).map_err(err)
}

/// Multi-dimensional DTW distance between two sequences (rows = frames).
#[pyfunction]
fn dtw_distance(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    similarity::dtw_distance(&to_sequence(a)?, &to_sequence(b)?).map_err(err)
}

/// DTW barycenter average of a set of sequences.
#[pyfunction]
#[pyo3(signature = (seqs, target_len=None, iters=10))]
fn dtw_barycenter(
    seqs: Vec<Vec<Vec<f64>>>,
    target_len: Option<usize>,
    iters: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let barycenter =
        similarity::dtw_barycenter(&to_sequences(seqs)?, target_len, iters).map_err(err)?;
    Ok(barycenter.rows())
}

/// k-means clustering under DTW; returns (labels, wcss).
#[pyfunction]
#[pyo3(signature = (seqs, k, restarts=10, seed=0))]
fn kmeans(
    seqs: Vec<Vec<Vec<f64>>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, f64)> {
    let opts = KmeansOptions { restarts, seed, ..Default::default() };
    let clustering = cluster::kmeans_dtw(&to_sequences(seqs)?, k, &opts).map_err(err)?;
    Ok((clustering.labels, clustering.wcss))
}

/// Elbow pick over a WCSS curve (index i holds the value for k = i + 1).
#[pyfunction]
fn elbow_select(wcss: Vec<f64>) -> PyResult<usize> {
    cluster::elbow_select(&wcss).map_err(err)
}

/// Density clustering of context vectors (exact-equality partition).
#[pyfunction]
fn context_clusters(contexts: Vec<Vec<i64>>) -> PyResult<Vec<usize>> {
    Ok(cluster::context_clusters(&contexts).map_err(err)?.labels)
}

/// Combine motion and context labels into renumbered ensemble labels.
#[pyfunction]
fn ensemble_merge(motion_labels: Vec<usize>, context_labels: Vec<usize>) -> PyResult<Vec<usize>> {
    let k = motion_labels.iter().copied().max().unwrap_or(0);
    let motion = cluster::MotionClustering {
        k,
        labels: motion_labels,
        barycenters: Vec::new(),
        wcss: 0.0,
        wcss_trace: Vec::new(),
    };
    let context = cluster::ContextClustering { labels: context_labels };
    let combined = cluster::ensemble_merge(&motion, &context).map_err(err)?;
    Ok(combined.into_iter().map(|c| c.label).collect())
}

/// Generate a synthetic scenario.
///
/// Returns (stream_jsonl, sidecar_json, catalog_json).
#[pyfunction]
#[pyo3(signature = (template, seed=0, noise=0.0, repetitions=None, layout=None, fps=30.0, flaw=None))]
fn simulate(
    template: &str,
    seed: u64,
    noise: f64,
    repetitions: Option<usize>,
    layout: Option<&str>,
    fps: f64,
    flaw: Option<&str>,
) -> PyResult<(String, String, String)> {
    let mut spec = ScenarioSpec::new(template.parse().map_err(err)?);
    spec.seed = seed;
    spec.noise = noise;
    spec.fps = fps;
    if let Some(r) = repetitions {
        spec.repetitions = r;
    }
    if let Some(l) = layout {
        spec.layout = l.to_string();
    }
    if let Some(f) = flaw {
        spec.flaw =
            Some(serde_json::from_str(f).map_err(|e| PyValueError::new_err(e.to_string()))?);
    }
    let scenario = scenario::generate_scenario(&spec).map_err(err)?;
    Ok((
        io::stream_to_string(&scenario.frames).map_err(err)?,
        serde_json::to_string(&scenario.sidecar).map_err(|e| PyValueError::new_err(e.to_string()))?,
        io::catalog_to_json(&scenario.catalog).map_err(err)?,
    ))
}

/// Segment a JSONL frame stream; returns the segmentation report as JSON.
#[pyfunction]
#[pyo3(signature = (stream_jsonl, catalog_json=None, hand=None))]
fn segment(stream_jsonl: &str, catalog_json: Option<&str>, hand: Option<u32>) -> PyResult<String> {
    let catalog = parse_catalog(catalog_json)?;
    let frames = parse_stream(stream_jsonl)?;
    let result = pipeline::segment_stream(&frames, &catalog, hand).map_err(err)?;
    serde_json::to_string(&result).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Train a nominal job model from segmentation reports (JSON strings).
/// Returns the model as JSON.
#[pyfunction]
fn train(reports: Vec<String>) -> PyResult<String> {
    let executions: Vec<SegmentationResult> = reports
        .iter()
        .map(|r| serde_json::from_str(r))
        .collect::<Result<_, _>>()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let nominal = anomaly::train_nominal(&executions).map_err(err)?;
    io::model_to_json(&nominal).map_err(err)
}

/// Monitor a stream against a trained model; returns the event log as a
/// JSON array.
#[pyfunction]
#[pyo3(signature = (stream_jsonl, model_json, catalog_json=None, hand=None))]
fn monitor(
    stream_jsonl: &str,
    model_json: &str,
    catalog_json: Option<&str>,
    hand: Option<u32>,
) -> PyResult<String> {
    let catalog = parse_catalog(catalog_json)?;
    let nominal = io::model_from_json(model_json).map_err(err)?;
    let frames = parse_stream(stream_jsonl)?;
    let events =
        anomaly::run_monitor(frames.into_iter().map(Ok), &catalog, &nominal, hand).map_err(err)?;
    serde_json::to_string(&events).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn sceneseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(dtw_distance, m)?)?;
    m.add_function(wrap_pyfunction!(dtw_barycenter, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(elbow_select, m)?)?;
    m.add_function(wrap_pyfunction!(context_clusters, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_merge, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(monitor, m)?)?;
    Ok(())
}
