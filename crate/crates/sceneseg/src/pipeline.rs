//! Batch glue: frames in, feature series and segmentation out.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{encode_features, extract_interaction_chain, EncodingParams, FeatureSeries};
use crate::graph::build_scene_graph;
use crate::kinematics::stream_kinematics;
use crate::scene::{validate_frame, ObjectCatalog, SceneFrame, SceneMode, VideoObjectId};
use crate::segment::{segment_series, SegmentationResult};

/// Pick the hand to analyze: the requested id, or the only hand present.
pub fn resolve_hand(frames: &[SceneFrame], requested: Option<u32>) -> Result<VideoObjectId> {
    let first = frames.first().ok_or(Error::InsufficientSamples { needed: 3, got: 0 })?;
    match requested {
        Some(id) => {
            let wanted = VideoObjectId::hand(id);
            first.hand(wanted).map(|_| wanted).ok_or(Error::HandNotInFrame(id))
        }
        None => match first.hands.as_slice() {
            [only] => Ok(only.id),
            [] => Err(Error::HandNotInFrame(0)),
            _ => Err(Error::InvalidFrame {
                frame: 0,
                summary: "several hands present; pick one with --hand".into(),
            }),
        },
    }
}

/// Zero the z components of every frame when the catalog is planar.
pub fn apply_mode(frames: &mut [SceneFrame], catalog: &ObjectCatalog) {
    if catalog.params.mode == SceneMode::Planar {
        for frame in frames {
            frame.flatten();
        }
    }
}

/// Strict validation of a whole stream; the error names the first offending
/// frame and lists its violations.
pub fn validate_stream(frames: &[SceneFrame], catalog: &ObjectCatalog) -> Result<()> {
    for (i, frame) in frames.iter().enumerate() {
        let report = validate_frame(frame, catalog);
        if !report.is_valid() {
            return Err(Error::InvalidFrame { frame: i, summary: report.summary() });
        }
    }
    Ok(())
}

/// Encode a validated stream into the per-frame feature couples of one hand.
pub fn encode_stream(
    frames: &[SceneFrame],
    catalog: &ObjectCatalog,
    hand: VideoObjectId,
) -> Result<FeatureSeries> {
    let kinematics = stream_kinematics(frames, catalog)?;
    let enc = EncodingParams::from_params(&catalog.params);
    let couples = frames
        .par_iter()
        .zip(&kinematics)
        .map(|(frame, kin)| {
            let graph = build_scene_graph(frame, kin, hand, catalog)?;
            let chain = extract_interaction_chain(&graph, enc.chain_depth);
            Ok(encode_features(&graph, &chain, &enc))
        })
        .collect::<Result<_>>()?;
    Ok(FeatureSeries { timestamps: frames.iter().map(|f| f.timestamp).collect(), couples })
}

/// Validate, encode, filter and segment a stream end to end.
pub fn segment_stream(
    frames: &[SceneFrame],
    catalog: &ObjectCatalog,
    hand: Option<u32>,
) -> Result<SegmentationResult> {
    let mut frames = frames.to_vec();
    apply_mode(&mut frames, catalog);
    validate_stream(&frames, catalog)?;
    let hand = resolve_hand(&frames, hand)?;
    let series = encode_stream(&frames, catalog, hand)?;
    segment_series(&series, &catalog.params)
}
