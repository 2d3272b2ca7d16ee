//! Acceptance suite. Each numbered test prints one PASS line with the
//! measured values; thresholds, tolerances and runtime budgets are asserted
//! in place.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::*;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sceneseg::anomaly::{
    evaluate_iu, finalize_activity, run_monitor, train_nominal, AnomalyKind, MonitorState,
    NominalIu, NominalJob,
};
use sceneseg::cluster::{context_clusters, elbow_select, ensemble_merge, kmeans_dtw, KmeansOptions};
use sceneseg::features::FeatureCouple;
use sceneseg::pipeline::segment_stream;
use sceneseg::scenario::{generate_scenario, FlawMode, FlawSpec, ScenarioSpec, Template};
use sceneseg::segment::{
    filter_couples, morpho_filter, segment_activities, segment_erus, segment_ius, InteractionUnit,
    SegmentationResult, Span,
};
use sceneseg::similarity::{
    dtw_barycenter_detailed, dtw_distance, MotionSequence,
};

fn within(a: Span, b: (usize, usize), tol: usize) -> bool {
    a.start.abs_diff(b.0) <= tol && a.end.abs_diff(b.1) <= tol
}

/// Criterion 1: the box-filling worked example segments into exactly
/// 5 activities x 4 IUs with boundaries within L frames of the sidecar
/// ground truth, in under a second.
#[test]
fn acceptance_1_box_filling_worked_example() {
    let start = Instant::now();
    let scenario = generate_scenario(&ScenarioSpec::new(Template::BoxFilling)).unwrap();
    let result = segment_stream(&scenario.frames, &scenario.catalog, None).unwrap();
    let tol = scenario.catalog.params.filter_length;

    assert_eq!(result.activities.len(), 5, "expected 5 activities");
    assert!(
        result.activities.iter().all(|a| a.iu_range.len() == 4),
        "expected 4 IUs per activity, got {:?}",
        result.activities.iter().map(|a| a.iu_range.len()).collect::<Vec<_>>()
    );
    assert_eq!(result.ius.len(), scenario.sidecar.ius.len());
    let mut max_offset = 0usize;
    for (iu, gt) in result.ius.iter().zip(&scenario.sidecar.ius) {
        assert!(
            within(iu.span, (gt.start, gt.end), tol),
            "IU {:?} vs ground truth [{}, {})",
            iu.span,
            gt.start,
            gt.end
        );
        assert_eq!(iu.context, gt.xc);
        max_offset = max_offset
            .max(iu.span.start.abs_diff(gt.start))
            .max(iu.span.end.abs_diff(gt.end));
    }
    for (act, gt) in result.activities.iter().zip(&scenario.sidecar.activities) {
        assert!(within(act.span, (gt.start, gt.end), tol));
        assert_eq!(act.anchor, gt.anchor);
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1: PASS (5 activities x 4 IUs, max boundary offset {max_offset} <= {tol} frames, {} ms < 1 s)",
        elapsed.as_millis()
    );
}

/// Criterion 2: DTW equals brute-force monotone-path enumeration on 200
/// random pairs, within 1e-12, in under 10 seconds.
#[test]
fn acceptance_2_dtw_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut max_err = 0.0f64;
    for case in 0..200 {
        let dim = rng.random_range(1..=3);
        let len_a = rng.random_range(1..=6);
        let len_b = rng.random_range(1..=6);
        let rows = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Vec<f64>> {
            (0..len).map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
        };
        let a = rows(&mut rng, len_a);
        let b = rows(&mut rng, len_b);
        let ours = dtw_distance(&seq_from_rows(&a), &seq_from_rows(&b)).unwrap();
        let oracle = brute_force_dtw(&a, &b);
        let err = (ours - oracle).abs();
        assert!(err <= 1e-12, "case {case}: {ours} vs {oracle}");
        max_err = max_err.max(err);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2: PASS (200 pairs, max |dtw - oracle| = {max_err:.2e} <= 1e-12, {} ms < 10 s)",
        elapsed.as_millis()
    );
}

/// Criterion 3: drilling configurations C1/C2/C3 produce element-wise
/// identical x_m at zero noise; at 2 mm noise, cross-configuration DTW
/// distances sit within 10% of within-configuration distances.
#[test]
fn acceptance_3_drilling_rigid_invariance() {
    let encode = |layout: &str, seed: u64, noise: f64| {
        let mut spec = spec_with(Template::Drilling, seed, noise);
        spec.layout = layout.into();
        let sc = generate_scenario(&spec).unwrap();
        segment_stream(&sc.frames, &sc.catalog, None).unwrap()
    };

    // zero noise: the full filtered motion series must match exactly
    for seed in [0u64, 1] {
        let reference: Vec<Vec<i64>> = {
            let seg = encode("c1", seed, 0.0);
            seg.erus
                .iter()
                .flat_map(|e| std::iter::repeat_n(e.value.motion.clone(), e.span.len()))
                .collect()
        };
        for layout in ["c2", "c3"] {
            let seg = encode(layout, seed, 0.0);
            let motion: Vec<Vec<i64>> = seg
                .erus
                .iter()
                .flat_map(|e| std::iter::repeat_n(e.value.motion.clone(), e.span.len()))
                .collect();
            assert_eq!(reference, motion, "x_m differs between c1 and {layout} at seed {seed}");
        }
    }

    // 2 mm noise: within- vs cross-configuration DTW of the drilling IU
    let drill_iu = |layout: &str, seed: u64| {
        let seg = encode(layout, seed, 0.002);
        assert_eq!(seg.ius.len(), 3, "drilling segments into 3 IUs");
        MotionSequence::from_rows(&seg.ius[1].motion).unwrap()
    };
    let per_config: Vec<Vec<MotionSequence>> = ["c1", "c2", "c3"]
        .iter()
        .enumerate()
        .map(|(c, l)| (0..4).map(|r| drill_iu(l, 1000 + c as u64 * 100 + r)).collect())
        .collect();
    let mut within_d = Vec::new();
    let mut cross_d = Vec::new();
    for c in 0..3 {
        for i in 0..4 {
            for j in i + 1..4 {
                within_d.push(dtw_distance(&per_config[c][i], &per_config[c][j]).unwrap());
            }
            for c2 in c + 1..3 {
                for j in 0..4 {
                    cross_d.push(dtw_distance(&per_config[c][i], &per_config[c2][j]).unwrap());
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mw, mc) = (mean(&within_d), mean(&cross_d));
    let rel = (mc - mw).abs() / mw;
    assert!(rel < 0.10, "within {mw:.4} cross {mc:.4} rel {rel:.4}");
    println!(
        "ACCEPTANCE 3: PASS (x_m identical across c1/c2/c3 at zero noise; \
         within {mw:.3} vs cross {mc:.3}, rel diff {:.1}% < 10%)",
        rel * 100.0
    );
}

/// u1..u6 of the activity-recognition corpus: (template, IU index).
const EXP1_SELECTION: [(Template, usize); 6] = [
    (Template::Measuring, 0),
    (Template::Boxing, 1),
    (Template::Measuring, 1),
    (Template::Assembly, 1),
    (Template::Disassembly, 0),
    (Template::Polishing, 1),
];

fn exp1_corpus() -> (Vec<MotionSequence>, Vec<Vec<i64>>, Vec<usize>) {
    let mut seqs = Vec::new();
    let mut contexts = Vec::new();
    let mut truth = Vec::new();
    for subject in 0..10u64 {
        for rep in 0..4u64 {
            let mut cache: BTreeMap<&'static str, SegmentationResult> = BTreeMap::new();
            for (ty, (template, iu_ix)) in EXP1_SELECTION.iter().enumerate() {
                let seg = cache.entry(template.name()).or_insert_with(|| {
                    let mut spec = spec_with(*template, 7000 + subject * 100 + rep * 10 + *template as u64, 0.0005);
                    spec.noise = 0.0005;
                    let sc = generate_scenario(&spec).unwrap();
                    segment_stream(&sc.frames, &sc.catalog, None).unwrap()
                });
                let iu = &seg.ius[*iu_ix];
                seqs.push(MotionSequence::from_rows(&iu.motion).unwrap());
                contexts.push(iu.context.clone());
                truth.push(ty);
            }
        }
    }
    (seqs, contexts, truth)
}

/// Criterion 4: the activity-recognition analog. 6 IU types x 10 subjects
/// x 4 repetitions; the elbow lands at k* = 4 +/- 1; at k = 4 the boxing,
/// measuring and assembly place-IUs form one motion cluster; context
/// clustering yields exactly 5 clusters merging assembly and disassembly;
/// the ensemble separates all 6 types. Under 5 minutes.
#[test]
fn acceptance_4_activity_recognition_analog() {
    let start = Instant::now();
    let (seqs, contexts, truth) = exp1_corpus();
    assert_eq!(seqs.len(), 240);

    let opts = KmeansOptions { restarts: 10, seed: 5, ..Default::default() };
    let wcss: Vec<f64> = (1..=10).map(|k| kmeans_dtw(&seqs, k, &opts).unwrap().wcss).collect();
    let k_star = elbow_select(&wcss).unwrap();
    assert!(
        (3..=5).contains(&k_star),
        "elbow picked k* = {k_star}, expected 4 +/- 1 (wcss {wcss:?})"
    );

    let motion = kmeans_dtw(&seqs, 4, &opts).unwrap();
    let labels_of = |ty: usize| -> BTreeSet<usize> {
        motion
            .labels
            .iter()
            .zip(&truth)
            .filter(|&(_, &t)| t == ty)
            .map(|(&l, _)| l)
            .collect()
    };
    let place_labels: BTreeSet<usize> =
        labels_of(1).union(&labels_of(2)).copied().collect::<BTreeSet<_>>()
            .union(&labels_of(3))
            .copied()
            .collect();
    assert_eq!(place_labels.len(), 1, "u2, u3, u4 must share one motion cluster");

    let context = context_clusters(&contexts).unwrap();
    let distinct_ctx: BTreeSet<usize> = context.labels.iter().copied().collect();
    assert_eq!(distinct_ctx.len(), 5, "expected exactly 5 context clusters");
    let ctx_of = |ty: usize| -> BTreeSet<usize> {
        context
            .labels
            .iter()
            .zip(&truth)
            .filter(|&(_, &t)| t == ty)
            .map(|(&l, _)| l)
            .collect()
    };
    assert_eq!(ctx_of(3), ctx_of(4), "assembly and disassembly must share a context cluster");

    let combined = ensemble_merge(&motion, &context).unwrap();
    let combined_of = |ty: usize| -> BTreeSet<usize> {
        combined
            .iter()
            .zip(&truth)
            .filter(|&(_, &t)| t == ty)
            .map(|(c, _)| c.label)
            .collect()
    };
    let mut all: BTreeSet<usize> = BTreeSet::new();
    for ty in 0..6 {
        let labels = combined_of(ty);
        assert_eq!(labels.len(), 1, "type u{} splits into {labels:?}", ty + 1);
        assert!(all.is_disjoint(&labels), "type u{} collides with another type", ty + 1);
        all.extend(labels);
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 4: PASS (k* = {k_star} in [3,5]; u2/u3/u4 one motion cluster; \
         5 context clusters with assembly+disassembly merged; ensemble separates all 6; \
         {:.1} s < 300 s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 5: the anomaly-detection analog. 10 cross-validation rounds,
/// 14 training / 21 test jobs with the two flaw templates; zero false
/// negatives on flawed jobs and IU-level accuracy >= 85% on correct
/// executions. Under 5 minutes.
#[test]
fn acceptance_5_anomaly_detection_analog() {
    let start = Instant::now();
    let generate = |seed: u64, flaw: Option<FlawSpec>| {
        let mut spec = spec_with(Template::PolishMeasureJob, seed, 0.0005);
        spec.flaw = flaw;
        generate_scenario(&spec).unwrap()
    };
    let correct: Vec<_> = (0..21).map(|s| generate(s, None)).collect();
    let halted: Vec<_> = (100..107)
        .map(|s| generate(s, Some(FlawSpec { activity: 0, iu: 1, mode: FlawMode::HaltHalfway })))
        .collect();
    let skipped: Vec<_> = (200..207)
        .map(|s| generate(s, Some(FlawSpec { activity: 1, iu: 1, mode: FlawMode::Skip })))
        .collect();
    let catalog = correct[0].catalog.clone();
    let segmented: Vec<SegmentationResult> =
        correct.iter().map(|sc| segment_stream(&sc.frames, &catalog, None).unwrap()).collect();

    // the paper-analog training skeleton: two activities of 3 + 2 IUs
    for seg in &segmented {
        assert_eq!(seg.activities.len(), 2);
        let counts: Vec<usize> = seg.activities.iter().map(|a| a.iu_range.len()).collect();
        assert_eq!(counts, vec![3, 2]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut missed_flawed = 0usize;
    let mut flawed_total = 0usize;
    let mut iu_evaluations = 0usize;
    let mut iu_false_positives = 0usize;
    for _round in 0..10 {
        let mut order: Vec<usize> = (0..21).collect();
        order.shuffle(&mut rng);
        let training: Vec<SegmentationResult> =
            order[..14].iter().map(|&i| segmented[i].clone()).collect();
        let nominal = train_nominal(&training).unwrap();
        assert_eq!(nominal.activities.len(), 2);
        assert_eq!(nominal.iu_count(), 5);

        for &i in &order[14..] {
            let events =
                run_monitor(correct[i].frames.iter().cloned().map(Ok), &catalog, &nominal, None)
                    .unwrap();
            iu_evaluations += 5;
            // conservative count: IU-level alerts plus not-completed verdicts
            iu_false_positives += events
                .iter()
                .filter(|e| {
                    e.kind.is_anomaly()
                        && (e.iu_index.is_some() || e.kind == AnomalyKind::ActivityNotCompleted)
                })
                .count();
        }
        for scenario in halted.iter().chain(&skipped) {
            let events =
                run_monitor(scenario.frames.iter().cloned().map(Ok), &catalog, &nominal, None)
                    .unwrap();
            flawed_total += 1;
            if !events.iter().any(|e| e.kind.is_anomaly()) {
                missed_flawed += 1;
            }
        }
    }

    let accuracy = 1.0 - iu_false_positives as f64 / iu_evaluations as f64;
    assert_eq!(missed_flawed, 0, "false negatives on flawed jobs: {missed_flawed}/{flawed_total}");
    assert!(accuracy >= 0.85, "IU-level accuracy {accuracy:.3} < 0.85");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 5: PASS (false negatives 0/{flawed_total}; IU accuracy {:.1}% >= 85%; \
         {:.1} s < 300 s)",
        accuracy * 100.0,
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: invariant suites as property tests, >= 100 randomized cases
// each (proptest runs 256 by default; explicit configs below never go lower
// than 100).
// ---------------------------------------------------------------------------

fn arbitrary_couples() -> impl Strategy<Value = Vec<FeatureCouple>> {
    prop::collection::vec((-1i64..2, 0i64..3, 0i64..4), 0..80).prop_map(|triples| {
        triples
            .into_iter()
            .map(|(sign, anchor, theta)| FeatureCouple {
                motion: vec![sign, theta, 0, 0],
                context: vec![1, anchor, 0, 0],
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    /// 6a: hierarchy nesting — activity boundaries are IU boundaries, IU
    /// boundaries are ERU boundaries, and the spans tile the stream.
    #[test]
    fn acceptance_6a_hierarchy_nesting(couples in arbitrary_couples(), level in 0usize..3) {
        let filter_len = 2 * level + 1;
        let enc = sceneseg::features::EncodingParams { chain_depth: 2, theta_bins: 4, phi_bins: 8 };
        let filtered = filter_couples(&couples, filter_len).unwrap();
        let erus = segment_erus(&filtered);
        let ius = segment_ius(&erus, &enc).unwrap();
        let activities = segment_activities(&ius);

        let mut cursor = 0;
        let eru_bounds: BTreeSet<usize> = erus
            .iter()
            .flat_map(|e| [e.span.start, e.span.end])
            .collect();
        for e in &erus {
            prop_assert_eq!(e.span.start, cursor);
            cursor = e.span.end;
        }
        prop_assert_eq!(cursor, filtered.len());

        let mut iu_cursor = 0;
        let iu_bounds: BTreeSet<usize> = ius.iter().flat_map(|u| [u.span.start, u.span.end]).collect();
        for u in &ius {
            prop_assert_eq!(u.span.start, iu_cursor);
            iu_cursor = u.span.end;
            prop_assert!(eru_bounds.contains(&u.span.start) && eru_bounds.contains(&u.span.end));
        }
        prop_assert_eq!(iu_cursor, filtered.len());

        for a in &activities {
            prop_assert!(iu_bounds.contains(&a.span.start) && iu_bounds.contains(&a.span.end));
        }
    }

    /// 6b: the opening-closing filter is idempotent.
    #[test]
    fn acceptance_6b_morphological_idempotence(
        signal in prop::collection::vec(-4i64..5, 0..80),
        level in 0usize..4,
    ) {
        let se_len = 2 * level + 1;
        let once = morpho_filter(&signal, se_len).unwrap();
        let twice = morpho_filter(&once, se_len).unwrap();
        prop_assert_eq!(once, twice);
    }

    /// 6c: DTW metric properties — symmetry, zero self-distance,
    /// non-negativity, and the true duplicate-frame facts (dtw(a, dup(a))
    /// = 0; duplication never decreases the distance).
    #[test]
    fn acceptance_6c_dtw_metric_properties(
        a in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2..=2), 1..8),
        b in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2..=2), 1..8),
        dup_at in 0usize..8,
    ) {
        let sa = seq_from_rows(&a);
        let sb = seq_from_rows(&b);
        let d_ab = dtw_distance(&sa, &sb).unwrap();
        let d_ba = dtw_distance(&sb, &sa).unwrap();
        prop_assert_eq!(d_ab, d_ba);
        prop_assert!(d_ab >= 0.0);
        prop_assert_eq!(dtw_distance(&sa, &sa).unwrap(), 0.0);

        let mut dup = a.clone();
        let at = dup_at % a.len();
        dup.insert(at, a[at].clone());
        let sdup = seq_from_rows(&dup);
        prop_assert_eq!(dtw_distance(&sa, &sdup).unwrap(), 0.0);
        prop_assert!(dtw_distance(&sdup, &sb).unwrap() >= d_ab - 1e-12);
    }

    /// 6d: the DBA objective (mean squared DTW distance to the barycenter)
    /// never increases across iterations.
    #[test]
    fn acceptance_6d_dba_objective_monotone(
        seqs in prop::collection::vec(
            prop::collection::vec(prop::collection::vec(0.0..1.0f64, 1..=1), 2..8),
            2..5,
        ),
    ) {
        let seqs: Vec<MotionSequence> = seqs.iter().map(|s| seq_from_rows(s)).collect();
        let fit = dtw_barycenter_detailed(&seqs, None, 8).unwrap();
        for w in fit.objective.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "objective rose: {:?}", fit.objective);
        }
    }

    /// 6f: context clustering partitions by exact vector equality.
    #[test]
    fn acceptance_6f_context_partition_exact(
        contexts in prop::collection::vec(prop::collection::vec(0i64..4, 4..=4), 1..40),
    ) {
        let clustering = context_clusters(&contexts).unwrap();
        for i in 0..contexts.len() {
            prop_assert!(clustering.labels[i] >= 1, "no context may be noise");
            for j in 0..contexts.len() {
                prop_assert_eq!(
                    clustering.labels[i] == clustering.labels[j],
                    contexts[i] == contexts[j]
                );
            }
        }
    }

    /// 6g (soundness): replaying the nominal barycenters through the
    /// monitor state machine yields no anomaly, whatever the model.
    #[test]
    fn acceptance_6g_monitor_zero_distance_soundness(
        shape in prop::collection::vec(1usize..4, 1..4),
        values in prop::collection::vec(0.0..1.0f64, 12..=12),
        thresholds in prop::collection::vec(0.0..0.5f64, 12..=12),
    ) {
        let mut nominal = NominalJob { activities: Vec::new() };
        let mut v = values.iter().cycle();
        let mut t = thresholds.iter().cycle();
        for (a, &len) in shape.iter().enumerate() {
            let mut ius = Vec::new();
            for i in 0..len {
                ius.push(NominalIu {
                    context: vec![1, (a * 7 + i + 2) as i64, 0, 0],
                    barycenter: seq_from_rows(&[vec![*v.next().unwrap()], vec![*v.next().unwrap()]]),
                    threshold: *t.next().unwrap(),
                });
            }
            nominal.activities.push(ius);
        }

        let mut state = MonitorState::new();
        let mut frame = 0usize;
        for activity in &nominal.activities {
            for nominal_iu in activity {
                let iu = InteractionUnit {
                    span: Span { start: frame, end: frame + 2 },
                    context: nominal_iu.context.clone(),
                    eru_range: Span { start: 0, end: 1 },
                    motion: nominal_iu.barycenter.rows(),
                };
                frame += 2;
                let alert = evaluate_iu(&mut state, &nominal, &iu, frame).unwrap();
                prop_assert!(alert.is_none(), "replaying the barycenter raised {alert:?}");
            }
            let verdict = finalize_activity(&mut state, &nominal, Span { start: 0, end: frame }, frame)
                .expect("a verdict is due at the boundary");
            prop_assert_eq!(verdict.kind, AnomalyKind::ActivityCorrect);
        }
    }
}

/// 6e: k-means WCSS never increases across Lloyd iterations.
/// (Plain loop over 100 seeded corpora: each case runs full k-means.)
#[test]
fn acceptance_6e_kmeans_wcss_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for case in 0..100 {
        let n = rng.random_range(4..10);
        let seqs: Vec<MotionSequence> = (0..n)
            .map(|_| {
                let len = rng.random_range(2..6);
                let rows: Vec<Vec<f64>> =
                    (0..len).map(|_| vec![rng.random_range(0.0..1.0)]).collect();
                seq_from_rows(&rows)
            })
            .collect();
        let k = rng.random_range(1..=3.min(n));
        let opts = KmeansOptions { restarts: 2, seed: case, max_iters: 20, dba_iters: 5 };
        let clustering = kmeans_dtw(&seqs, k, &opts).unwrap();
        for w in clustering.wcss_trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "case {case}: WCSS rose {:?}",
                clustering.wcss_trace
            );
        }
    }
    println!("ACCEPTANCE 6e: PASS (WCSS monotone over 100 random k-means runs)");
}

/// 6g (determinism): identical stream + model produce identical event logs.
#[test]
fn acceptance_6g_monitor_determinism() {
    let generate = |seed: u64, flaw: Option<FlawSpec>| {
        let mut spec = spec_with(Template::PolishMeasureJob, seed, 0.001);
        spec.flaw = flaw;
        generate_scenario(&spec).unwrap()
    };
    let training: Vec<SegmentationResult> = (0..4)
        .map(|s| {
            let sc = generate(s, None);
            segment_stream(&sc.frames, &sc.catalog, None).unwrap()
        })
        .collect();
    let catalog = generate(0, None).catalog;
    let nominal = train_nominal(&training).unwrap();

    let mut checked = 0;
    for seed in 50..150u64 {
        let flaw = match seed % 3 {
            0 => None,
            1 => Some(FlawSpec { activity: 0, iu: 1, mode: FlawMode::HaltHalfway }),
            _ => Some(FlawSpec { activity: 1, iu: 1, mode: FlawMode::Skip }),
        };
        let scenario = generate(seed, flaw);
        let run = || {
            run_monitor(scenario.frames.iter().cloned().map(Ok), &catalog, &nominal, None).unwrap()
        };
        let first = run();
        let second = run();
        assert_eq!(first, second, "seed {seed}: event logs differ between runs");
        checked += 1;
    }
    assert_eq!(checked, 100);
    println!("ACCEPTANCE 6g: PASS (identical event logs across 100 monitored streams, run twice)");
}
