//! Event-based segmentation of feature series.
//!
//! The raw integer features are cleaned with a per-dimension grayscale
//! opening-closing filter, then cut into the event hierarchy: ERUs (maximal
//! constant-X runs), Interaction Units (maximal constant-x_c runs of ERUs)
//! and activities (runs of IUs sharing the object the hand engaged).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{normalize_motion, EncodingParams, FeatureCouple, FeatureSeries};
use crate::scene::Params;

/// Half-open frame span [start, end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

fn erode(signal: &[i64], radius: usize) -> Vec<i64> {
    let n = signal.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            *signal[lo..=hi].iter().min().unwrap()
        })
        .collect()
}

fn dilate(signal: &[i64], radius: usize) -> Vec<i64> {
    let n = signal.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            *signal[lo..=hi].iter().max().unwrap()
        })
        .collect()
}

/// Grayscale opening (erosion then dilation) followed by closing (dilation
/// then erosion) with a flat structuring element of odd length `se_len`.
/// Runs shorter than `se_len` are removed.
pub fn morpho_filter(signal: &[i64], se_len: usize) -> Result<Vec<i64>> {
    if se_len % 2 == 0 {
        return Err(Error::EvenFilterLength(se_len));
    }
    if se_len <= 1 || signal.len() <= 1 {
        return Ok(signal.to_vec());
    }
    let r = se_len / 2;
    let opened = dilate(&erode(signal, r), r);
    Ok(erode(&dilate(&opened, r), r))
}

/// Apply the opening-closing filter to every motion and context dimension
/// of a couple series independently.
pub fn filter_couples(couples: &[FeatureCouple], se_len: usize) -> Result<Vec<FeatureCouple>> {
    if couples.is_empty() {
        if se_len % 2 == 0 {
            return Err(Error::EvenFilterLength(se_len));
        }
        return Ok(Vec::new());
    }
    let motion_dim = couples[0].motion.len();
    let context_dim = couples[0].context.len();
    let mut filtered: Vec<FeatureCouple> = couples
        .iter()
        .map(|_| FeatureCouple { motion: vec![0; motion_dim], context: vec![0; context_dim] })
        .collect();
    for d in 0..motion_dim {
        let signal: Vec<i64> = couples.iter().map(|c| c.motion[d]).collect();
        for (i, v) in morpho_filter(&signal, se_len)?.into_iter().enumerate() {
            filtered[i].motion[d] = v;
        }
    }
    for d in 0..context_dim {
        let signal: Vec<i64> = couples.iter().map(|c| c.context[d]).collect();
        for (i, v) in morpho_filter(&signal, se_len)?.into_iter().enumerate() {
            filtered[i].context[d] = v;
        }
    }
    Ok(filtered)
}

/// Elementary Reaction Unit: a maximal run of frames with constant X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eru {
    pub span: Span,
    pub value: FeatureCouple,
}

/// Interaction Unit: a maximal run of ERUs sharing the context vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionUnit {
    pub span: Span,
    pub context: Vec<i64>,
    /// Indices into the ERU list of the same segmentation.
    pub eru_range: Span,
    /// Normalized motion features, one row per frame of the span.
    pub motion: Vec<Vec<f64>>,
}

impl InteractionUnit {
    /// The object engaged by the hand in this IU (context slot 2), or 0.
    pub fn anchor(&self) -> i64 {
        self.context.get(1).copied().unwrap_or(0)
    }
}

/// Activity: a run of IUs anchored on the first object the hand engaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySegment {
    pub span: Span,
    /// Indices into the IU list of the same segmentation.
    pub iu_range: Span,
    pub anchor: i64,
}

/// Parameters echoed into every segmentation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub filter_length: usize,
    pub encoding: EncodingParams,
    pub params: Params,
}

/// The full three-level event hierarchy of one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub erus: Vec<Eru>,
    pub ius: Vec<InteractionUnit>,
    pub activities: Vec<ActivitySegment>,
    pub provenance: Provenance,
}

impl SegmentationResult {
    /// IUs of one activity.
    pub fn activity_ius(&self, activity: &ActivitySegment) -> &[InteractionUnit] {
        &self.ius[activity.iu_range.start..activity.iu_range.end]
    }
}

/// Maximal constant-X runs, in time order.
pub fn segment_erus(filtered: &[FeatureCouple]) -> Vec<Eru> {
    let mut erus: Vec<Eru> = Vec::new();
    for (i, couple) in filtered.iter().enumerate() {
        match erus.last_mut() {
            Some(last) if last.value == *couple => last.span.end = i + 1,
            _ => erus.push(Eru { span: Span { start: i, end: i + 1 }, value: couple.clone() }),
        }
    }
    erus
}

/// Group consecutive ERUs sharing the context vector into IUs.
pub fn segment_ius(erus: &[Eru], enc: &EncodingParams) -> Result<Vec<InteractionUnit>> {
    let mut ius: Vec<InteractionUnit> = Vec::new();
    for (e, eru) in erus.iter().enumerate() {
        let rows = || -> Result<Vec<Vec<f64>>> {
            let row = normalize_motion(&eru.value.motion, enc)?;
            Ok(vec![row; eru.span.len()])
        };
        match ius.last_mut() {
            Some(last) if last.context == eru.value.context => {
                last.span.end = eru.span.end;
                last.eru_range.end = e + 1;
                last.motion.extend(rows()?);
            }
            _ => ius.push(InteractionUnit {
                span: eru.span,
                context: eru.value.context.clone(),
                eru_range: Span { start: e, end: e + 1 },
                motion: rows()?,
            }),
        }
    }
    Ok(ius)
}

/// Cut the IU sequence into activities.
///
/// A new activity begins at an IU whose anchor (the object the hand
/// engages, context slot 2) is non-zero and differs from the running
/// anchor; IUs with no hand-object link attach to the current activity.
/// Leading IUs before the hand first engages anything belong to no
/// activity.
pub fn segment_activities(ius: &[InteractionUnit]) -> Vec<ActivitySegment> {
    let mut activities: Vec<ActivitySegment> = Vec::new();
    for (i, iu) in ius.iter().enumerate() {
        let anchor = iu.anchor();
        match activities.last_mut() {
            Some(current) if anchor == 0 || anchor == current.anchor => {
                current.span.end = iu.span.end;
                current.iu_range.end = i + 1;
            }
            _ if anchor == 0 => {} // before the first engagement
            _ => activities.push(ActivitySegment {
                span: iu.span,
                iu_range: Span { start: i, end: i + 1 },
                anchor,
            }),
        }
    }
    activities
}

/// Filter a raw feature series and segment it into the full hierarchy.
pub fn segment_series(series: &FeatureSeries, params: &Params) -> Result<SegmentationResult> {
    let enc = EncodingParams::from_params(params);
    let filtered = filter_couples(&series.couples, params.filter_length)?;
    let erus = segment_erus(&filtered);
    let ius = segment_ius(&erus, &enc)?;
    let activities = segment_activities(&ius);
    Ok(SegmentationResult {
        erus,
        ius,
        activities,
        provenance: Provenance {
            filter_length: params.filter_length,
            encoding: enc,
            params: params.clone(),
        },
    })
}
