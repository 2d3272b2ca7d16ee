//! Anomaly detection in job executions.
//!
//! A nominal job is trained from segmented correct executions: per IU
//! position a DTW barycenter, the training context, and a distance
//! threshold mu + 2 sigma. Monitoring keeps the candidate set J \ L per
//! activity: each completed IU eliminates candidates whose context differs
//! or whose barycenter is farther than the threshold; at the activity
//! boundary the completed sequence must match a surviving candidate
//! exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::online::{OnlineSegmenter, SegmentEvent};
use crate::scene::{ObjectCatalog, SceneFrame};
use crate::segment::{InteractionUnit, SegmentationResult, Span};
use crate::similarity::{dtw_barycenter, dtw_distance, MotionSequence};

/// Trained model of one IU position within an activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominalIu {
    pub context: Vec<i64>,
    pub barycenter: MotionSequence,
    /// d_th = mu + 2 sigma of the training distances to the barycenter.
    pub threshold: f64,
}

/// Ordered nominal activities of a job, each an ordered list of IUs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominalJob {
    pub activities: Vec<Vec<NominalIu>>,
}

impl NominalJob {
    pub fn iu_count(&self) -> usize {
        self.activities.iter().map(|a| a.len()).sum()
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

const TRAIN_DBA_ITERS: usize = 10;

/// Train a nominal job from segmented correct executions.
///
/// All executions must share the same skeleton: activity count, per-activity
/// IU count and per-position context. The check is explicit and the error
/// names the diverging execution and position.
pub fn train_nominal(executions: &[SegmentationResult]) -> Result<NominalJob> {
    if executions.len() < 2 {
        return Err(Error::NotEnoughExecutions(executions.len()));
    }
    let reference = &executions[0];
    for (e, exec) in executions.iter().enumerate().skip(1) {
        if exec.activities.len() != reference.activities.len() {
            return Err(Error::SkeletonMismatch {
                execution: e,
                position: "job".into(),
                detail: format!(
                    "{} activities, expected {}",
                    exec.activities.len(),
                    reference.activities.len()
                ),
            });
        }
        for (a, (ra, ea)) in reference.activities.iter().zip(&exec.activities).enumerate() {
            let (r_ius, e_ius) = (reference.activity_ius(ra), exec.activity_ius(ea));
            if r_ius.len() != e_ius.len() {
                return Err(Error::SkeletonMismatch {
                    execution: e,
                    position: format!("activity {a}"),
                    detail: format!("{} IUs, expected {}", e_ius.len(), r_ius.len()),
                });
            }
            for (i, (ri, ei)) in r_ius.iter().zip(e_ius).enumerate() {
                if ri.context != ei.context {
                    return Err(Error::SkeletonMismatch {
                        execution: e,
                        position: format!("activity {a}, iu {i}"),
                        detail: format!("context {:?}, expected {:?}", ei.context, ri.context),
                    });
                }
            }
        }
    }

    let mut activities = Vec::with_capacity(reference.activities.len());
    for (a, ra) in reference.activities.iter().enumerate() {
        let mut nominal_ius = Vec::with_capacity(ra.iu_range.len());
        for i in 0..ra.iu_range.len() {
            let seqs: Vec<MotionSequence> = executions
                .iter()
                .map(|exec| {
                    let iu = &exec.activity_ius(&exec.activities[a])[i];
                    MotionSequence::from_rows(&iu.motion)
                })
                .collect::<Result<_>>()?;
            let barycenter = dtw_barycenter(&seqs, None, TRAIN_DBA_ITERS)?;
            let distances: Vec<f64> =
                seqs.iter().map(|s| dtw_distance(s, &barycenter)).collect::<Result<_>>()?;
            let (mu, sigma) = mean_std(&distances);
            nominal_ius.push(NominalIu {
                context: reference.activity_ius(ra)[i].context.clone(),
                barycenter,
                threshold: mu + 2.0 * sigma,
            });
        }
        activities.push(nominal_ius);
    }
    Ok(NominalJob { activities })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnomalyKind {
    ContextMismatchAllCandidates,
    MotionExceededAllCandidates,
    NoCandidateActivity,
    ActivityNotCompleted,
    ActivityCorrect,
}

impl AnomalyKind {
    pub fn is_anomaly(&self) -> bool {
        !matches!(self, AnomalyKind::ActivityCorrect)
    }
}

/// Why one candidate activity left the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Elimination {
    /// Candidate has fewer IUs than already completed.
    TooShort,
    /// Context vectors differ.
    Context,
    /// DTW distance exceeded the trained threshold.
    Motion,
}

/// Outcome of comparing one completed IU against one candidate activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub activity: usize,
    pub distance: Option<f64>,
    pub threshold: Option<f64>,
    pub eliminated: Option<Elimination>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    pub kind: AnomalyKind,
    /// Ordinal of the executed activity within the monitored stream.
    pub activity_ordinal: usize,
    /// 1-based IU position within the activity, for IU-level events.
    pub iu_index: Option<usize>,
    /// IU span for IU-level events, activity span for verdicts.
    pub span: Span,
    /// Frame at which the triggering boundary actually lies.
    pub boundary_frame: usize,
    /// Frame at which the monitor could detect it (filter look-ahead).
    pub detection_frame: usize,
    pub candidates: Vec<CandidateCheck>,
}

/// Monitoring state: the candidate bookkeeping of the detection algorithm.
#[derive(Debug, Clone)]
pub struct MonitorState {
    /// L: indices of non-candidate activities.
    eliminated: Vec<usize>,
    /// C: spans of the completed IUs of the current activity.
    completed: Vec<Span>,
    /// 1-based index of the next IU within the current activity.
    iu_index: usize,
    activity_in_j: bool,
    activity_ordinal: usize,
}

impl Default for MonitorState {
    fn default() -> Self {
        Self {
            eliminated: Vec::new(),
            completed: Vec::new(),
            iu_index: 1,
            activity_in_j: true,
            activity_ordinal: 0,
        }
    }
}

impl MonitorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Completed IUs of the current activity so far.
    pub fn completed_count(&self) -> usize {
        self.completed.len()
    }

    /// Indices of the eliminated activities (the L list).
    pub fn eliminated(&self) -> &[usize] {
        &self.eliminated
    }

    pub fn candidates_left(&self, nominal: &NominalJob) -> usize {
        nominal.activities.len() - self.eliminated.len()
    }

    fn reset_for_next_activity(&mut self) {
        self.eliminated.clear();
        self.completed.clear();
        self.iu_index = 1;
        self.activity_in_j = true;
        self.activity_ordinal += 1;
    }
}

/// Compare a completed IU against every candidate activity's IU at the same
/// position; candidates failing the context or motion gate join L. Returns
/// an event iff the candidate set just became empty.
///
/// Erroring when called after the candidate set emptied keeps accidental
/// double-processing loud; [`run_monitor`] stops comparing for the rest of
/// the activity instead.
pub fn evaluate_iu(
    state: &mut MonitorState,
    nominal: &NominalJob,
    iu: &InteractionUnit,
    detection_frame: usize,
) -> Result<Option<AnomalyEvent>> {
    if !state.activity_in_j {
        return Err(Error::MonitorNotReset);
    }
    let i = state.iu_index;
    state.completed.push(iu.span);
    state.iu_index += 1;

    let motion = MotionSequence::from_rows(&iu.motion)?;
    let mut checks = Vec::new();
    for (a, activity) in nominal.activities.iter().enumerate() {
        if state.eliminated.contains(&a) {
            continue;
        }
        let check = match activity.get(i - 1) {
            None => CandidateCheck {
                activity: a,
                distance: None,
                threshold: None,
                eliminated: Some(Elimination::TooShort),
            },
            Some(nominal_iu) if nominal_iu.context != iu.context => CandidateCheck {
                activity: a,
                distance: None,
                threshold: Some(nominal_iu.threshold),
                eliminated: Some(Elimination::Context),
            },
            Some(nominal_iu) => {
                let d = dtw_distance(&motion, &nominal_iu.barycenter)?;
                CandidateCheck {
                    activity: a,
                    distance: Some(d),
                    threshold: Some(nominal_iu.threshold),
                    eliminated: (d > nominal_iu.threshold).then_some(Elimination::Motion),
                }
            }
        };
        if check.eliminated.is_some() {
            state.eliminated.push(a);
        }
        checks.push(check);
    }

    if state.eliminated.len() == nominal.activities.len() {
        state.activity_in_j = false;
        let this_step: Vec<Elimination> = checks.iter().filter_map(|c| c.eliminated).collect();
        let kind = if !this_step.is_empty() && this_step.iter().all(|e| *e == Elimination::Context)
        {
            AnomalyKind::ContextMismatchAllCandidates
        } else if !this_step.is_empty() && this_step.iter().all(|e| *e == Elimination::Motion) {
            AnomalyKind::MotionExceededAllCandidates
        } else {
            AnomalyKind::NoCandidateActivity
        };
        return Ok(Some(AnomalyEvent {
            kind,
            activity_ordinal: state.activity_ordinal,
            iu_index: Some(i),
            span: iu.span,
            boundary_frame: iu.span.end,
            detection_frame,
            candidates: checks,
        }));
    }
    Ok(None)
}

/// Close the current activity: correct iff some surviving candidate has
/// exactly as many IUs as were completed (each position already validated).
/// Returns None when an earlier no-candidate alert already stands as the
/// verdict. The state is reset for the next activity either way.
pub fn finalize_activity(
    state: &mut MonitorState,
    nominal: &NominalJob,
    activity_span: Span,
    detection_frame: usize,
) -> Option<AnomalyEvent> {
    let verdict = if state.activity_in_j {
        let done = state.completed.len();
        let matched = nominal
            .activities
            .iter()
            .enumerate()
            .any(|(a, ius)| !state.eliminated.contains(&a) && ius.len() == done);
        let kind =
            if matched { AnomalyKind::ActivityCorrect } else { AnomalyKind::ActivityNotCompleted };
        Some(AnomalyEvent {
            kind,
            activity_ordinal: state.activity_ordinal,
            iu_index: None,
            span: activity_span,
            boundary_frame: activity_span.end,
            detection_frame,
            candidates: Vec::new(),
        })
    } else {
        None
    };
    state.reset_for_next_activity();
    verdict
}

/// Drive the online segmenter over a frame source and evaluate every
/// completed IU and activity against the nominal job. The log is
/// deterministic for a deterministic stream.
pub fn run_monitor<I>(
    frames: I,
    catalog: &ObjectCatalog,
    nominal: &NominalJob,
    hand: Option<u32>,
) -> Result<Vec<AnomalyEvent>>
where
    I: IntoIterator<Item = Result<SceneFrame>>,
{
    let mut segmenter = OnlineSegmenter::new(catalog.clone(), hand)?;
    let mut state = MonitorState::new();
    let mut log = Vec::new();

    let handle = |state: &mut MonitorState,
                      log: &mut Vec<AnomalyEvent>,
                      events: Vec<SegmentEvent>|
     -> Result<()> {
        for event in events {
            match event {
                SegmentEvent::IuCompleted { iu, activity_ordinal, detection_frame } => {
                    if activity_ordinal.is_none() {
                        continue; // before the hand first engages anything
                    }
                    if state.activity_in_j {
                        if let Some(alert) = evaluate_iu(state, nominal, &iu, detection_frame)? {
                            log.push(alert);
                        }
                    } else {
                        // no candidates left: keep counting completed IUs
                        state.completed.push(iu.span);
                        state.iu_index += 1;
                    }
                }
                SegmentEvent::ActivityCompleted { activity, detection_frame, .. } => {
                    if let Some(verdict) =
                        finalize_activity(state, nominal, activity.span, detection_frame)
                    {
                        log.push(verdict);
                    }
                }
            }
        }
        Ok(())
    };

    for frame in frames {
        let events = segmenter.push(frame?)?;
        handle(&mut state, &mut log, events)?;
    }
    let events = segmenter.finish()?;
    handle(&mut state, &mut log, events)?;
    Ok(log)
}
