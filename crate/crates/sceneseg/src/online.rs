//! Incremental segmentation with bounded look-ahead.
//!
//! The online segmenter consumes frames one at a time and emits IU and
//! activity completion events as soon as they are decidable. A frame's
//! feature couple is final once the kinematics windows around it are full
//! (smoothing radius plus two differentiation steps) and the morphological
//! filter's support is covered (twice the structuring element length minus
//! two on each side), so boundary events lag the true boundary by
//! `latency_frames`. The emitted IUs and activities are identical to what
//! the batch path produces on the full stream.

use crate::error::{Error, Result};
use crate::features::{
    encode_features, extract_interaction_chain, normalize_motion, EncodingParams, FeatureCouple,
};
use crate::graph::build_scene_graph;
use crate::kinematics::stream_kinematics;
use crate::scene::{validate_frame, ObjectCatalog, SceneFrame, SceneMode, VideoObjectId};
use crate::segment::{filter_couples, ActivitySegment, Eru, InteractionUnit, Span};

/// Boundary event emitted by the online segmenter.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentEvent {
    IuCompleted {
        iu: InteractionUnit,
        /// Ordinal of the activity this IU belongs to, None before the hand
        /// first engages an object.
        activity_ordinal: Option<usize>,
        /// Frames consumed when the completion became decidable.
        detection_frame: usize,
    },
    ActivityCompleted {
        activity: ActivitySegment,
        ordinal: usize,
        detection_frame: usize,
    },
}

struct EruBuilder {
    start: usize,
    value: FeatureCouple,
}

struct IuBuilder {
    start: usize,
    context: Vec<i64>,
    eru_start: usize,
    motion: Vec<Vec<f64>>,
}

struct ActivityBuilder {
    ordinal: usize,
    anchor: i64,
    start: usize,
    iu_start: usize,
}

pub struct OnlineSegmenter {
    catalog: ObjectCatalog,
    enc: EncodingParams,
    requested_hand: Option<u32>,
    hand: Option<VideoObjectId>,
    expected_ids: Vec<VideoObjectId>,

    frames: Vec<SceneFrame>,
    features: Vec<FeatureCouple>,
    filt_done: usize,

    erus: Vec<Eru>,
    iu_count: usize,
    next_ordinal: usize,
    cur_eru: Option<EruBuilder>,
    cur_iu: Option<IuBuilder>,
    cur_act: Option<ActivityBuilder>,
    finished: bool,
}

impl OnlineSegmenter {
    pub fn new(catalog: ObjectCatalog, hand: Option<u32>) -> Result<Self> {
        catalog.validate()?;
        let enc = EncodingParams::from_params(&catalog.params);
        Ok(Self {
            catalog,
            enc,
            requested_hand: hand,
            hand: None,
            expected_ids: Vec::new(),
            frames: Vec::new(),
            features: Vec::new(),
            filt_done: 0,
            erus: Vec::new(),
            iu_count: 0,
            next_ordinal: 0,
            cur_eru: None,
            cur_iu: None,
            cur_act: None,
            finished: false,
        })
    }

    /// Number of frames a boundary event lags its true position.
    pub fn latency_frames(&self) -> usize {
        let smoothing_lag = self.catalog.params.smoothing_window / 2 + 2;
        let filter_lag = 2 * (self.catalog.params.filter_length - 1);
        smoothing_lag + filter_lag
    }

    fn frame_ids(frame: &SceneFrame) -> Vec<VideoObjectId> {
        let mut ids: Vec<VideoObjectId> = frame
            .hands
            .iter()
            .map(|h| h.id)
            .chain(frame.objects.iter().map(|o| o.id))
            .collect();
        ids.sort_unstable();
        ids
    }

    fn ingest(&mut self, mut frame: SceneFrame) -> Result<()> {
        if self.catalog.params.mode == SceneMode::Planar {
            frame.flatten();
        }
        let index = self.frames.len();
        let report = validate_frame(&frame, &self.catalog);
        if !report.is_valid() {
            return Err(Error::InvalidFrame { frame: index, summary: report.summary() });
        }
        if let Some(last) = self.frames.last() {
            if frame.timestamp <= last.timestamp {
                return Err(Error::NonMonotonicTime {
                    index,
                    prev: last.timestamp,
                    next: frame.timestamp,
                });
            }
            if let Some(max) = self.catalog.params.max_time_gap {
                let gap = frame.timestamp - last.timestamp;
                if gap > max {
                    return Err(Error::TimeGapExceeded { index, gap, max });
                }
            }
            if Self::frame_ids(&frame) != self.expected_ids {
                return Err(Error::InvalidFrame {
                    frame: index,
                    summary: "tracked id set changed mid-stream".into(),
                });
            }
        } else {
            self.expected_ids = Self::frame_ids(&frame);
            self.hand = Some(match self.requested_hand {
                Some(id) => {
                    let wanted = VideoObjectId::hand(id);
                    frame.hand(wanted).map(|_| wanted).ok_or(Error::HandNotInFrame(id))?
                }
                None => match frame.hands.as_slice() {
                    [only] => only.id,
                    [] => return Err(Error::HandNotInFrame(0)),
                    _ => {
                        return Err(Error::InvalidFrame {
                            frame: index,
                            summary: "several hands present; pick one explicitly".into(),
                        })
                    }
                },
            });
        }
        self.frames.push(frame);
        Ok(())
    }

    /// Extend `self.features` with every frame whose kinematics are final.
    ///
    /// Kinematics of frame f are unaffected by later input once positions up
    /// to f + smoothing radius + 2 exist, so the batch estimator on the
    /// buffered prefix already yields the final values there.
    fn advance_features(&mut self, up_to: usize) -> Result<()> {
        if self.features.len() >= up_to {
            return Ok(());
        }
        let hand = self.hand.expect("hand resolved at first frame");
        let kinematics = stream_kinematics(&self.frames, &self.catalog)?;
        for f in self.features.len()..up_to {
            let graph = build_scene_graph(&self.frames[f], &kinematics[f], hand, &self.catalog)?;
            let chain = extract_interaction_chain(&graph, self.enc.chain_depth);
            self.features.push(encode_features(&graph, &chain, &self.enc));
        }
        Ok(())
    }

    /// Run the filter over the buffered features and process every frame
    /// whose filtered value is final.
    fn advance_filtered(&mut self, up_to: usize, events: &mut Vec<SegmentEvent>) -> Result<()> {
        if self.filt_done >= up_to {
            return Ok(());
        }
        let filtered = filter_couples(&self.features, self.catalog.params.filter_length)?;
        let detection = self.frames.len();
        for f in self.filt_done..up_to {
            self.process_frame(f, &filtered[f], detection, events)?;
        }
        self.filt_done = up_to;
        Ok(())
    }

    fn process_frame(
        &mut self,
        f: usize,
        couple: &FeatureCouple,
        detection: usize,
        events: &mut Vec<SegmentEvent>,
    ) -> Result<()> {
        match &self.cur_eru {
            None => {
                self.cur_eru = Some(EruBuilder { start: f, value: couple.clone() });
                self.cur_iu = Some(IuBuilder {
                    start: f,
                    context: couple.context.clone(),
                    eru_start: 0,
                    motion: Vec::new(),
                });
                self.maybe_transition_activity(couple, f, detection, events);
            }
            Some(cur) if cur.value != *couple => {
                let closed = self.cur_eru.take().unwrap();
                self.erus.push(Eru {
                    span: Span { start: closed.start, end: f },
                    value: closed.value,
                });
                if self.cur_iu.as_ref().unwrap().context != couple.context {
                    self.close_iu(f, detection, events);
                    self.maybe_transition_activity(couple, f, detection, events);
                    self.cur_iu = Some(IuBuilder {
                        start: f,
                        context: couple.context.clone(),
                        eru_start: self.erus.len(),
                        motion: Vec::new(),
                    });
                }
                self.cur_eru = Some(EruBuilder { start: f, value: couple.clone() });
            }
            Some(_) => {}
        }
        let row = normalize_motion(&couple.motion, &self.enc)?;
        self.cur_iu.as_mut().unwrap().motion.push(row);
        Ok(())
    }

    fn close_iu(&mut self, end: usize, detection: usize, events: &mut Vec<SegmentEvent>) {
        let builder = self.cur_iu.take().expect("an IU is always open while frames flow");
        let iu = InteractionUnit {
            span: Span { start: builder.start, end },
            context: builder.context,
            eru_range: Span { start: builder.eru_start, end: self.erus.len() },
            motion: builder.motion,
        };
        events.push(SegmentEvent::IuCompleted {
            iu,
            activity_ordinal: self.cur_act.as_ref().map(|a| a.ordinal),
            detection_frame: detection,
        });
        self.iu_count += 1;
    }

    /// Open or switch the running activity according to the anchor of the
    /// IU starting at `f`. Must run after the previous IU was closed.
    fn maybe_transition_activity(
        &mut self,
        couple: &FeatureCouple,
        f: usize,
        detection: usize,
        events: &mut Vec<SegmentEvent>,
    ) {
        let anchor = couple.context.get(1).copied().unwrap_or(0);
        if anchor == 0 || self.cur_act.as_ref().is_some_and(|a| a.anchor == anchor) {
            return;
        }
        if let Some(act) = self.cur_act.take() {
            events.push(SegmentEvent::ActivityCompleted {
                activity: ActivitySegment {
                    span: Span { start: act.start, end: f },
                    iu_range: Span { start: act.iu_start, end: self.iu_count },
                    anchor: act.anchor,
                },
                ordinal: act.ordinal,
                detection_frame: detection,
            });
        }
        self.cur_act = Some(ActivityBuilder {
            ordinal: self.next_ordinal,
            anchor,
            start: f,
            iu_start: self.iu_count,
        });
        self.next_ordinal += 1;
    }

    /// Feed one frame; returns every event that became decidable.
    pub fn push(&mut self, frame: SceneFrame) -> Result<Vec<SegmentEvent>> {
        assert!(!self.finished, "push after finish");
        self.ingest(frame)?;
        let n = self.frames.len();
        let mut events = Vec::new();

        let smoothing_lag = self.catalog.params.smoothing_window / 2 + 2;
        if n > smoothing_lag + 1 {
            self.advance_features(n - smoothing_lag)?;
        }
        let filter_lag = 2 * (self.catalog.params.filter_length - 1);
        if self.features.len() > filter_lag {
            self.advance_filtered(self.features.len() - filter_lag, &mut events)?;
        }
        Ok(events)
    }

    /// Flush: finalize every pending frame, IU and activity.
    pub fn finish(&mut self) -> Result<Vec<SegmentEvent>> {
        assert!(!self.finished, "finish called twice");
        self.finished = true;
        let n = self.frames.len();
        let mut events = Vec::new();
        if n == 0 {
            return Ok(events);
        }
        self.advance_features(n)?;
        self.advance_filtered(n, &mut events)?;

        if let Some(closed) = self.cur_eru.take() {
            self.erus.push(Eru { span: Span { start: closed.start, end: n }, value: closed.value });
        }
        if self.cur_iu.is_some() {
            self.close_iu(n, n, &mut events);
        }
        if let Some(act) = self.cur_act.take() {
            events.push(SegmentEvent::ActivityCompleted {
                activity: ActivitySegment {
                    span: Span { start: act.start, end: n },
                    iu_range: Span { start: act.iu_start, end: self.iu_count },
                    anchor: act.anchor,
                },
                ordinal: act.ordinal,
                detection_frame: n,
            });
        }
        Ok(events)
    }

    /// ERUs finalized so far.
    pub fn erus(&self) -> &[Eru] {
        &self.erus
    }
}
