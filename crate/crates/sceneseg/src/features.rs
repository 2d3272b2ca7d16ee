//! Feature couple extraction.
//!
//! Each per-hand scene graph is reduced to a couple X = (x_m, x_c) of fixed
//! width: x_m holds the hand acceleration sign plus per-link direction bins
//! and joint-motion flags along the interaction chain, x_c holds the ids of
//! the chain endpoints. Absent links are filled with the 0 sentinel so every
//! couple in a stream has identical width.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SceneGraph;
use crate::scene::VideoObjectId;

/// Integer feature couple of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureCouple {
    /// [a_h, then per link: theta_q, phi_q, jm]; width 1 + 3 * depth.
    pub motion: Vec<i64>,
    /// [per link: id_from, id_to]; width 2 * depth.
    pub context: Vec<i64>,
}

/// Fixed encoding layout shared by every couple of a compared corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingParams {
    pub chain_depth: usize,
    pub theta_bins: u32,
    pub phi_bins: u32,
}

impl EncodingParams {
    pub fn from_params(p: &crate::scene::Params) -> Self {
        Self { chain_depth: p.chain_depth, theta_bins: p.theta_bins, phi_bins: p.phi_bins }
    }

    pub fn motion_dim(&self) -> usize {
        1 + 3 * self.chain_depth
    }

    pub fn context_dim(&self) -> usize {
        2 * self.chain_depth
    }

    /// Fixed range [lo, hi] of one motion dimension; the basis of the
    /// per-dimension affine normalization.
    pub fn motion_range(&self, dim: usize) -> (i64, i64) {
        if dim == 0 {
            return (-1, 1);
        }
        match (dim - 1) % 3 {
            0 => (0, self.theta_bins as i64),
            1 => (0, self.phi_bins as i64),
            _ => (0, 1),
        }
    }
}

/// One link of the interaction chain: `from` moving relative to `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLink {
    pub from: VideoObjectId,
    pub to: VideoObjectId,
    /// Accumulated shortest-path cost from the hand to `to`.
    pub cost: f64,
}

/// Shortest-path interaction chain from the hand node.
///
/// Runs Dijkstra with the edge distance as cost, then lists the links of the
/// shortest-path tree ordered by path cost, truncated at `depth`. Cost ties
/// order parents before children and otherwise break by ascending id, so the
/// chain is always in tree order.
pub fn extract_interaction_chain(graph: &SceneGraph, depth: usize) -> Vec<ChainLink> {
    let hand = graph.hand_id;
    let mut cost: BTreeMap<VideoObjectId, f64> = BTreeMap::new();
    let mut tree_depth: BTreeMap<VideoObjectId, usize> = BTreeMap::new();
    let mut parent: BTreeMap<VideoObjectId, VideoObjectId> = BTreeMap::new();
    let mut done: Vec<VideoObjectId> = Vec::new();

    cost.insert(hand, 0.0);
    tree_depth.insert(hand, 0);

    while done.len() < graph.nodes.len() {
        let Some((&next, _)) = cost
            .iter()
            .filter(|(id, _)| !done.contains(id))
            .min_by(|(ia, ca), (ib, cb)| ca.partial_cmp(cb).unwrap().then(ia.cmp(ib)))
        else {
            break; // remaining nodes unreachable from the hand
        };
        done.push(next);
        let base = cost[&next];
        let depth_here = tree_depth[&next];
        for (neighbor, distance) in graph.neighbors(next) {
            let candidate = base + distance;
            let better = match cost.get(&neighbor) {
                None => true,
                Some(&existing) => candidate < existing,
            };
            if better {
                cost.insert(neighbor, candidate);
                tree_depth.insert(neighbor, depth_here + 1);
                parent.insert(neighbor, next);
            }
        }
    }

    let mut reached: Vec<VideoObjectId> =
        parent.keys().copied().filter(|id| *id != hand).collect();
    reached.sort_by(|a, b| {
        cost[a]
            .partial_cmp(&cost[b])
            .unwrap()
            .then(tree_depth[a].cmp(&tree_depth[b]))
            .then(a.cmp(b))
    });
    reached
        .into_iter()
        .take(depth)
        .map(|id| ChainLink { from: parent[&id], to: id, cost: cost[&id] })
        .collect()
}

/// Encode the feature couple of one graph given its interaction chain.
pub fn encode_features(
    graph: &SceneGraph,
    chain: &[ChainLink],
    enc: &EncodingParams,
) -> FeatureCouple {
    let mut motion = vec![0i64; enc.motion_dim()];
    let mut context = vec![0i64; enc.context_dim()];
    motion[0] = graph.nodes[&graph.hand_id].kinematics.accel_sign as i64;

    for (l, link) in chain.iter().take(enc.chain_depth).enumerate() {
        let relation = graph
            .relation(link.from, link.to)
            .expect("chain link must reference an edge of the same graph");
        let (theta, phi) = relation.direction.map_or((0, 0), |(t, p)| (t as i64, p as i64));
        motion[1 + 3 * l] = theta;
        motion[2 + 3 * l] = phi;
        motion[3 + 3 * l] = i64::from(relation.joint_motion);
        context[2 * l] = link.from.id as i64;
        context[2 * l + 1] = link.to.id as i64;
    }
    if context.first() == Some(&0) {
        // No links at all: the first context slot still names the hand.
        context[0] = graph.hand_id.id as i64;
    }
    FeatureCouple { motion, context }
}

/// Map a raw motion vector into [0, 1] per dimension using the fixed ranges.
pub fn normalize_motion(motion: &[i64], enc: &EncodingParams) -> Result<Vec<f64>> {
    motion
        .iter()
        .enumerate()
        .map(|(dim, &v)| {
            let (lo, hi) = enc.motion_range(dim);
            if v < lo || v > hi {
                return Err(Error::FeatureOutOfRange { dim, value: v, lo, hi });
            }
            Ok((v - lo) as f64 / (hi - lo) as f64)
        })
        .collect()
}

/// Raw feature couples of a stream, one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub timestamps: Vec<f64>,
    pub couples: Vec<FeatureCouple>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.couples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couples.is_empty()
    }

    /// Normalized motion matrix, one row per frame.
    pub fn normalized_motion(&self, enc: &EncodingParams) -> Result<Vec<Vec<f64>>> {
        self.couples.iter().map(|c| normalize_motion(&c.motion, enc)).collect()
    }
}
