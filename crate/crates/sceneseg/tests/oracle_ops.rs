//! Operation-level checks against independent oracles: homogeneous-matrix
//! transforms, exhaustive pair scans, Floyd-Warshall shortest paths,
//! hand-traced morphology and run-length encoding.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use common::*;
use nalgebra::{Point3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use sceneseg::features::{
    encode_features, extract_interaction_chain, ChainLink, EncodingParams, FeatureCouple,
};
use sceneseg::graph::{
    interaction_direction, min_interaction_distance, world_interaction_points, DirectionParams,
    EdgeRelations, NodeAttrs, Relation, SceneGraph,
};
use sceneseg::scene::{KinematicState, ObjectObservation, Orientation, VideoObjectId};
use sceneseg::segment::{filter_couples, morpho_filter, segment_activities, segment_erus, segment_ius};
use sceneseg::similarity::{dtw_barycenter, dtw_distance};

fn point3() -> impl Strategy<Value = Point3<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn unit_quaternion() -> impl Strategy<Value = UnitQuaternion<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.01..TAU).prop_map(|(x, y, z, angle)| {
        let axis = Vector3::new(x, y, z);
        if axis.norm() < 1e-6 {
            UnitQuaternion::identity()
        } else {
            UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
        }
    })
}

proptest! {
    // world interaction points match a 4x4 homogeneous matrix transform
    #[test]
    fn world_points_match_matrix_oracle(
        q in unit_quaternion(),
        pos in point3(),
        locals in prop::collection::vec(point3(), 1..5),
    ) {
        let obs = ObjectObservation {
            id: VideoObjectId::object(2),
            position: pos,
            orientation: Orientation::Spatial(q),
        };
        let ours = world_interaction_points(&obs, &locals);
        for (p, local) in ours.iter().zip(&locals) {
            let expected = homogeneous_transform(&q, &pos.coords, local);
            prop_assert!((p - expected).norm() < 1e-9);
        }
    }

    // min interaction distance equals the exhaustive pair scan
    #[test]
    fn min_distance_matches_exhaustive_scan(
        a in prop::collection::vec(point3(), 1..4),
        b in prop::collection::vec(point3(), 1..5),
    ) {
        let expected = a
            .iter()
            .flat_map(|pa| b.iter().map(move |pb| (pa - pb).norm()))
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min_interaction_distance(&a, &b).unwrap(), expected);
    }

    // direction quantization matches an independent rotate-then-atan2 oracle
    #[test]
    fn direction_matches_rotation_oracle(
        q in unit_quaternion(),
        v in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let velocity = Vector3::new(v.0, v.1, v.2);
        let params = DirectionParams { theta_bins: 4, phi_bins: 8, eps_v: 0.01 };
        let ours = interaction_direction(&velocity, &Orientation::Spatial(q), &params);
        if velocity.norm() < params.eps_v {
            prop_assert_eq!(ours, None);
        } else {
            // oracle: rotation matrix transpose, spherical angles, manual bins
            let m = q.to_rotation_matrix();
            let w = m.matrix().transpose() * velocity;
            let horizontal = (w.x * w.x + w.y * w.y).sqrt();
            let azimuth = if horizontal < params.eps_v { 0.0 } else { w.y.atan2(w.x) };
            let elevation = w.z.atan2(horizontal);
            let phi = {
                let wrapped = (azimuth % TAU + TAU) % TAU;
                ((wrapped / (TAU / 8.0)).floor() as i64).clamp(0, 7) as u32 + 1
            };
            let theta = if elevation >= std::f64::consts::FRAC_PI_2 {
                4
            } else {
                let span = std::f64::consts::PI;
                let wrapped = ((elevation + span / 2.0) % span + span) % span;
                ((wrapped / (span / 4.0)).floor() as i64).clamp(0, 3) as u32 + 1
            };
            prop_assert_eq!(ours, Some((theta, phi)));
        }
    }
}

fn rest_node() -> NodeAttrs {
    NodeAttrs {
        kinematics: KinematicState::at_rest(),
        world_ips: vec![Point3::origin()],
        orientation: None,
    }
}

fn graph_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> SceneGraph {
    // node 0 is the hand; others are objects 2..
    let id = |ix: usize| {
        if ix == 0 {
            VideoObjectId::hand(1)
        } else {
            VideoObjectId::object(ix as u32 + 1)
        }
    };
    let mut nodes = BTreeMap::new();
    for ix in 0..n {
        nodes.insert(id(ix), rest_node());
    }
    let mut graph_edges = BTreeMap::new();
    for &(a, b, w) in edges {
        let (ia, ib) = (id(a), id(b));
        let key = if ia < ib { (ia, ib) } else { (ib, ia) };
        let relation = Relation { distance: w, joint_motion: false, direction: None };
        graph_edges.insert(key, EdgeRelations { forward: relation, reverse: relation });
    }
    SceneGraph { hand_id: id(0), nodes, edges: graph_edges }
}

proptest! {
    // the interaction chain follows shortest paths from the hand: targets
    // are the depth-D closest reachable nodes and every link lies on a
    // shortest path, verified against Floyd-Warshall
    #[test]
    fn chain_matches_floyd_warshall_oracle(
        n in 2usize..6,
        edge_bits in prop::collection::vec(0.001..0.05f64, 10),
        mask in 0u32..1024,
    ) {
        let mut edges = Vec::new();
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                if mask & (1 << k) != 0 {
                    edges.push((a, b, edge_bits[k % edge_bits.len()]));
                }
                k += 1;
            }
        }
        let graph = graph_from_edges(n, &edges);
        let dist = floyd_warshall(n, &edges);
        let chain = extract_interaction_chain(&graph, 2);

        let ix_of = |vid: VideoObjectId| -> usize {
            if vid.is_hand() { 0 } else { vid.id as usize - 1 }
        };
        // reachable non-hand nodes sorted by (cost, id)
        let mut reachable: Vec<(f64, usize)> = (1..n)
            .filter(|&i| dist[0][i].is_finite())
            .map(|i| (dist[0][i], i))
            .collect();
        reachable.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(chain.len(), reachable.len().min(2));

        let mut last_cost = 0.0;
        for ChainLink { from, to, cost } in &chain {
            let (f, t) = (ix_of(*from), ix_of(*to));
            // link target cost equals the oracle shortest distance
            prop_assert!((cost - dist[0][t]).abs() < 1e-12);
            // the link lies on a shortest path through an existing edge
            let w = edges
                .iter()
                .find(|&&(a, b, _)| (a, b) == (f, t) || (b, a) == (f, t))
                .map(|&(_, _, w)| w)
                .expect("chain links must be graph edges");
            prop_assert!((dist[0][f] + w - dist[0][t]).abs() < 1e-12);
            // ordered by path cost
            prop_assert!(*cost >= last_cost - 1e-12);
            last_cost = *cost;
        }
    }

    // opening-closing agrees with the naive window-scan oracle
    #[test]
    fn morpho_filter_matches_naive_oracle(
        signal in prop::collection::vec(-3i64..4, 0..40),
        radius in 0usize..4,
    ) {
        let se_len = 2 * radius + 1;
        prop_assert_eq!(morpho_filter(&signal, se_len).unwrap(), naive_open_close(&signal, se_len));
    }

    // hand-traced length-9 signals
    #[test]
    fn morpho_filter_matches_oracle_on_length_nine(signal in prop::collection::vec(0i64..3, 9..=9)) {
        prop_assert_eq!(morpho_filter(&signal, 3).unwrap(), naive_open_close(&signal, 3));
    }

    // ERU segmentation is run-length encoding of the couple series
    #[test]
    fn erus_match_rle_oracle(values in prop::collection::vec(0i64..3, 0..60)) {
        let couples: Vec<FeatureCouple> = values
            .iter()
            .map(|&v| FeatureCouple { motion: vec![v], context: vec![v % 2] })
            .collect();
        let erus = segment_erus(&couples);
        let runs = rle_runs(&couples);
        prop_assert_eq!(erus.len(), runs.len());
        for (eru, (start, end, value)) in erus.iter().zip(runs) {
            prop_assert_eq!(eru.span.start, start);
            prop_assert_eq!(eru.span.end, end);
            prop_assert_eq!(&eru.value, &value);
        }
    }

    // IU segmentation is run-length encoding of the context component
    #[test]
    fn ius_match_context_rle_oracle(contexts in prop::collection::vec(0i64..3, 1..60)) {
        let enc = EncodingParams { chain_depth: 1, theta_bins: 4, phi_bins: 8 };
        let couples: Vec<FeatureCouple> = contexts
            .iter()
            .enumerate()
            .map(|(i, &c)| FeatureCouple { motion: vec![(i % 2) as i64, 0, 0, 0], context: vec![1, c] })
            .collect();
        let ius = segment_ius(&segment_erus(&couples), &enc).unwrap();
        let runs = rle_runs(&contexts);
        prop_assert_eq!(ius.len(), runs.len());
        for (iu, (start, end, _)) in ius.iter().zip(runs) {
            prop_assert_eq!(iu.span.start, start);
            prop_assert_eq!(iu.span.end, end);
        }
    }

    // activity segmentation agrees with a hand-written anchor-change scan
    #[test]
    fn activities_match_anchor_scan_oracle(anchors in prop::collection::vec(0i64..4, 1..40)) {
        let enc = EncodingParams { chain_depth: 2, theta_bins: 4, phi_bins: 8 };
        let couples: Vec<FeatureCouple> = anchors
            .iter()
            .map(|&a| FeatureCouple { motion: vec![0; 7], context: vec![1, a, 0, 0] })
            .collect();
        let ius = segment_ius(&segment_erus(&couples), &enc).unwrap();
        let activities = segment_activities(&ius);

        // oracle: scan IU anchors, opening a new activity on a changed
        // non-zero anchor
        let mut expected: Vec<i64> = Vec::new();
        let mut current: Option<i64> = None;
        for iu in &ius {
            let anchor = iu.anchor();
            if anchor != 0 && current != Some(anchor) {
                expected.push(anchor);
                current = Some(anchor);
            }
        }
        prop_assert_eq!(activities.iter().map(|a| a.anchor).collect::<Vec<_>>(), expected);
    }
}

#[test]
fn composed_two_link_encoding_from_graph_oracles() {
    // hand holds A (joint motion) while A approaches B from +x of B's frame
    let params = DirectionParams { theta_bins: 4, phi_bins: 8, eps_v: 0.01 };
    let approach = Vector3::new(-0.3, 0.0, 0.0); // moving towards B along -x
    let bins = interaction_direction(&approach, &Orientation::identity(Default::default()), &params)
        .expect("moving object has a direction");

    let hand = VideoObjectId::hand(1);
    let a = VideoObjectId::object(2);
    let b = VideoObjectId::object(3);
    let mut nodes = BTreeMap::new();
    let moving = KinematicState {
        velocity: approach,
        speed: approach.norm(),
        tangential_accel: 1.0,
        accel_sign: 1,
    };
    nodes.insert(hand, NodeAttrs { kinematics: moving, world_ips: vec![Point3::origin()], orientation: None });
    nodes.insert(a, NodeAttrs { kinematics: moving, world_ips: vec![Point3::origin()], orientation: Some(Orientation::identity(Default::default())) });
    nodes.insert(b, rest_node());
    let mut edges = BTreeMap::new();
    let in_hand = Relation { distance: 0.005, joint_motion: true, direction: None };
    edges.insert((hand, a), EdgeRelations { forward: in_hand, reverse: in_hand });
    let approach_rel = Relation { distance: 0.015, joint_motion: false, direction: Some(bins) };
    edges.insert((a, b), EdgeRelations { forward: approach_rel, reverse: approach_rel });
    let graph = SceneGraph { hand_id: hand, nodes, edges };

    let enc = EncodingParams { chain_depth: 2, theta_bins: 4, phi_bins: 8 };
    let chain = extract_interaction_chain(&graph, 2);
    let couple = encode_features(&graph, &chain, &enc);
    assert_eq!(couple.context, vec![1, 2, 2, 3]);
    assert_eq!(couple.motion[3], 1, "first link is in-hand");
    assert_eq!((couple.motion[4] as u32, couple.motion[5] as u32), bins);
    assert_eq!(couple.motion[6], 0, "approach link is not joint motion");
}

#[test]
fn dba_barycenter_beats_mean_pairwise_distance_on_noisy_steps() {
    // 5 noisy copies of a step signal
    let step = |shift: usize, noise: f64| -> Vec<Vec<f64>> {
        (0..20)
            .map(|i| vec![if i < 10 + shift { 0.1 + noise } else { 0.9 - noise }])
            .collect()
    };
    let seqs = vec![
        seq_from_rows(&step(0, 0.00)),
        seq_from_rows(&step(1, 0.02)),
        seq_from_rows(&step(2, -0.01)),
        seq_from_rows(&step(0, 0.03)),
        seq_from_rows(&step(1, -0.02)),
    ];
    let barycenter = dtw_barycenter(&seqs, None, 10).unwrap();
    let to_barycenter: f64 = seqs
        .iter()
        .map(|s| dtw_distance(s, &barycenter).unwrap())
        .sum::<f64>()
        / seqs.len() as f64;
    let mut pairwise = Vec::new();
    for i in 0..seqs.len() {
        for j in i + 1..seqs.len() {
            pairwise.push(dtw_distance(&seqs[i], &seqs[j]).unwrap());
        }
    }
    let mean_pairwise = pairwise.iter().sum::<f64>() / pairwise.len() as f64;
    assert!(
        to_barycenter <= mean_pairwise + 1e-12,
        "barycenter {to_barycenter} vs pairwise {mean_pairwise}"
    );
}

#[test]
fn filtered_series_behaves_like_per_dimension_oracle() {
    // spot-check the couple-level filter against the per-dimension oracle
    let couples: Vec<FeatureCouple> = (0..30)
        .map(|i| FeatureCouple {
            motion: vec![(i / 7) % 2, i % 3, 0],
            context: vec![1, if (10..12).contains(&i) { 5 } else { 2 }],
        })
        .collect();
    let filtered = filter_couples(&couples, 5).unwrap();
    for d in 0..3 {
        let signal: Vec<i64> = couples.iter().map(|c| c.motion[d]).collect();
        let expected = naive_open_close(&signal, 5);
        let got: Vec<i64> = filtered.iter().map(|c| c.motion[d]).collect();
        assert_eq!(got, expected, "motion dim {d}");
    }
    for d in 0..2 {
        let signal: Vec<i64> = couples.iter().map(|c| c.context[d]).collect();
        let expected = naive_open_close(&signal, 5);
        let got: Vec<i64> = filtered.iter().map(|c| c.context[d]).collect();
        assert_eq!(got, expected, "context dim {d}");
    }
}
