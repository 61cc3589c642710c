use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::control::{broadcast, ControlLog, ControlTraffic, MessageKind};
use crate::error::{Error, Result};
use crate::geometry::GridIndex;
use crate::model::{NeighborTable, NodeId, Topology};

/// Gap kept below `6 r_c` so the super cluster range stays strictly inside the
/// connectivity limit.
pub const RS_EPSILON: f64 = 1e-6;

/// Distances below this floor (m) are clamped in the proximity factor.
const D_FLOOR: f64 = 1.0;

/// Comparative cluster head score. Not a probability: it is unbounded and
/// carries length units through the centrality factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChScore {
    pub node: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchWeight {
    pub node: NodeId,
    pub weight: f64,
    /// `alpha / weight`, or infinity when the weight is zero.
    pub timer: f64,
}

/// Score of node `i`: residual energy fraction times mean distance to the
/// neighbors within `r_c` times `d_max / d(i, BS)`.
pub fn ch_score(t: &Topology, i: NodeId, r_c: f64, invert_centrality: bool) -> Result<ChScore> {
    let node = t.node(i)?;
    if !node.alive {
        return Err(Error::DeadNode(i));
    }
    let d_max = t.farthest_distance_to_bs()?;
    let neighbors = t.neighbors_within(i, r_c)?;
    Ok(score_with(t, i, &neighbors, d_max, invert_centrality))
}

pub(crate) fn score_with(
    t: &Topology,
    i: NodeId,
    neighbors: &[NodeId],
    d_max: f64,
    invert_centrality: bool,
) -> ChScore {
    let node = &t.nodes[i.index()];
    let energy = node.energy_fraction();
    let centrality = if neighbors.is_empty() {
        1.0
    } else {
        let sum: f64 = neighbors.iter().map(|&j| t.dist(i, j)).sum();
        let k = neighbors.len() as f64;
        if invert_centrality {
            k / sum.max(D_FLOOR)
        } else {
            sum / k
        }
    };
    let proximity = d_max.max(D_FLOOR) / t.dist_bs(i).max(D_FLOOR);
    ChScore {
        node: i,
        score: energy * centrality * proximity,
    }
}

/// Higher score first, lower id on ties.
fn by_priority(a: &ChScore, b: &ChScore) -> Ordering {
    b.score.total_cmp(&a.score).then(a.node.cmp(&b.node))
}

/// Cluster head election over the alive nodes.
///
/// Every node announces its score within `r_c` and elects itself when it beats
/// every neighbor (ties to the lower id); isolated nodes elect themselves.
/// Nodes that hear no advertisement repeat the comparison against the
/// neighbors that are still uncovered, using the scores they already hold.
/// Iterating to a fixed point is the same as walking nodes in priority order
/// and electing each one that has no head within `r_c` yet, which is how it is
/// computed here. The result is separated (no two heads within `r_c`) and
/// covering (every alive node is a head or within `r_c` of one).
pub fn elect_cluster_heads(
    t: &Topology,
    r_c: f64,
    invert_centrality: bool,
) -> Result<(Vec<NodeId>, ControlTraffic)> {
    let table = t.neighbor_table(r_c);
    let mut log = ControlLog::new();
    let heads = elect_cluster_heads_with(t, &table, invert_centrality, &mut log)?;
    Ok((heads, ControlTraffic::from_log(&log)))
}

pub(crate) fn elect_cluster_heads_with(
    t: &Topology,
    table: &NeighborTable,
    invert_centrality: bool,
    log: &mut ControlLog,
) -> Result<Vec<NodeId>> {
    let d_max = t.farthest_distance_to_bs()?;
    let r_c = table.radius;
    let mut scores: Vec<ChScore> = t
        .alive_ids()
        .map(|i| score_with(t, i, table.of(i), d_max, invert_centrality))
        .collect();
    for s in &scores {
        log.push(broadcast(s.node, MessageKind::ChInf, r_c));
    }
    scores.sort_by(by_priority);

    let mut covered = vec![false; t.len()];
    let mut heads = Vec::new();
    for s in &scores {
        if covered[s.node.index()] {
            continue;
        }
        heads.push(s.node);
        covered[s.node.index()] = true;
        for &j in table.of(s.node) {
            covered[j.index()] = true;
        }
        log.push(broadcast(s.node, MessageKind::ChAdv, r_c));
    }
    heads.sort_unstable();
    Ok(heads)
}

/// Weight of a super cluster head candidate with `d_h` lower-layer heads in range.
pub fn sch_weight(t: &Topology, i: NodeId, d_h: usize, alpha: f64) -> Result<SchWeight> {
    let node = t.node(i)?;
    if !node.alive {
        return Err(Error::DeadNode(i));
    }
    Ok(weight_of(t, i, d_h, alpha))
}

fn weight_of(t: &Topology, i: NodeId, d_h: usize, alpha: f64) -> SchWeight {
    let weight = t.nodes[i.index()].energy_fraction() * d_h as f64;
    let timer = if weight > 0.0 { alpha / weight } else { f64::INFINITY };
    SchWeight {
        node: i,
        weight,
        timer,
    }
}

/// Super cluster head range of `layer` (3 and up): grows by `r_c` per layer,
/// capped at `r_t` and kept below `6 r_c`.
pub fn layer_range(layer: u8, r_c: f64, r_t: f64) -> f64 {
    let layer = layer.max(3);
    let grown = f64::from(layer - 1) * r_c;
    grown.min(r_t).min(6.0 * r_c - RS_EPSILON)
}

/// True once growing the layer no longer widens the range.
pub(crate) fn range_saturated(layer: u8, r_c: f64, r_t: f64) -> bool {
    layer_range(layer.saturating_add(1), r_c, r_t) <= layer_range(layer, r_c, r_t)
}

/// Timer race for one super cluster layer.
///
/// Candidates are the alive nodes not marked in `is_head`. Each counts the
/// `lower_heads` within `r_s` as its `d_H`, and timers expire in ascending
/// order (ties to the lower id). A candidate elects itself unless an already
/// elected head of this layer lies within `r_s`. Candidates with zero weight
/// never fire.
pub fn elect_super_cluster_heads(
    t: &Topology,
    lower_heads: &[NodeId],
    is_head: &[bool],
    r_s: f64,
    alpha: f64,
) -> (Vec<NodeId>, Vec<SchWeight>, ControlTraffic) {
    let mut log = ControlLog::new();
    let (heads, weights) = elect_super_cluster_heads_with(t, lower_heads, is_head, r_s, alpha, &mut log);
    (heads, weights, ControlTraffic::from_log(&log))
}

pub(crate) fn elect_super_cluster_heads_with(
    t: &Topology,
    lower_heads: &[NodeId],
    is_head: &[bool],
    r_s: f64,
    alpha: f64,
    log: &mut ControlLog,
) -> (Vec<NodeId>, Vec<SchWeight>) {
    let lower = GridIndex::new(lower_heads.iter().map(|&h| (h.0, t.pos(h))), r_s);
    let mut weights: Vec<SchWeight> = t
        .alive_ids()
        .filter(|i| !is_head.get(i.index()).copied().unwrap_or(false))
        .map(|i| {
            let p = t.pos(i);
            let mut d_h = 0;
            lower.for_each_candidate(&p, r_s, |k| {
                if t.pos(NodeId(k)).distance(&p) <= r_s {
                    d_h += 1;
                }
            });
            weight_of(t, i, d_h, alpha)
        })
        .filter(|w| w.weight > 0.0)
        .collect();
    // Ascending timer is descending weight for any positive alpha; sorting on
    // the weight keeps the order exact under rescaling.
    weights.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.node.cmp(&b.node)));

    let mut elected: Vec<NodeId> = Vec::new();
    for w in &weights {
        let p = t.pos(w.node);
        let suppressed = elected.iter().any(|&s| t.pos(s).distance(&p) <= r_s);
        if !suppressed {
            elected.push(w.node);
            log.push(broadcast(w.node, MessageKind::SchAdv, r_s));
        }
    }
    elected.sort_unstable();
    (elected, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Position;
    use approx::assert_relative_eq;

    fn topo(points: &[(f64, f64)], bs: (f64, f64)) -> Topology {
        let pos: Vec<Position> = points.iter().map(|&(x, y)| Position::new(x, y)).collect();
        Topology::from_positions(&pos, Position::new(bs.0, bs.1), 2000.0, 8.0)
    }

    #[test]
    fn score_hand_example() {
        // Node 0 sits 350 m from the BS with neighbors at 30 m and 50 m; node 3
        // is the farthest node at 700 m.
        let t = topo(
            &[(350.0, 0.0), (380.0, 0.0), (350.0, 50.0), (-700.0, 0.0)],
            (0.0, 0.0),
        );
        let s = ch_score(&t, NodeId(0), 50.0, false).unwrap();
        assert_relative_eq!(s.score, 80.0, max_relative = 1e-12);
    }

    #[test]
    fn inverted_centrality() {
        let t = topo(
            &[(350.0, 0.0), (380.0, 0.0), (350.0, 50.0), (-700.0, 0.0)],
            (0.0, 0.0),
        );
        let s = ch_score(&t, NodeId(0), 50.0, true).unwrap();
        assert_relative_eq!(s.score, (2.0 / 80.0) * 2.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_energy_scores_zero_and_dead_is_error() {
        let mut t = topo(&[(10.0, 0.0), (20.0, 0.0)], (0.0, 0.0));
        t.nodes[0].e_res = 0.0;
        let s = score_with(&t, NodeId(0), &[NodeId(1)], 20.0, false);
        assert_eq!(s.score, 0.0);
        t.nodes[0].alive = false;
        assert_eq!(ch_score(&t, NodeId(0), 50.0, false), Err(Error::DeadNode(NodeId(0))));
    }

    #[test]
    fn isolated_node_at_farthest_distance_scores_one() {
        let t = topo(&[(300.0, 0.0), (0.0, 200.0)], (0.0, 0.0));
        let s = ch_score(&t, NodeId(0), 50.0, false).unwrap();
        assert_relative_eq!(s.score, 1.0);
    }

    #[test]
    fn node_on_base_station_is_capped() {
        let t = topo(&[(0.0, 0.0), (0.0, 200.0)], (0.0, 0.0));
        let s = ch_score(&t, NodeId(0), 50.0, false).unwrap();
        assert!(s.score.is_finite());
        assert_relative_eq!(s.score, 200.0);
    }

    #[test]
    fn isolated_node_elects_itself() {
        let t = topo(&[(0.0, 0.0), (500.0, 0.0)], (250.0, 0.0));
        let (heads, traffic) = elect_cluster_heads(&t, 50.0, false).unwrap();
        assert_eq!(heads, [NodeId(0), NodeId(1)]);
        assert_eq!(traffic.ch_inf, 2);
        assert_eq!(traffic.ch_adv, 2);
    }

    #[test]
    fn higher_score_dominates() {
        // Node 1 is closer to the BS, so it outscores node 0.
        let t = topo(&[(400.0, 0.0), (380.0, 0.0)], (0.0, 0.0));
        let s0 = ch_score(&t, NodeId(0), 50.0, false).unwrap().score;
        let s1 = ch_score(&t, NodeId(1), 50.0, false).unwrap().score;
        assert!(s1 > s0);
        let (heads, _) = elect_cluster_heads(&t, 50.0, false).unwrap();
        assert_eq!(heads, [NodeId(1)]);
    }

    #[test]
    fn equal_scores_go_to_lower_id() {
        // Mirror images around the BS have identical scores.
        let t = topo(&[(20.0, 0.0), (-20.0, 0.0)], (0.0, 0.0));
        let (heads, _) = elect_cluster_heads(&t, 50.0, false).unwrap();
        assert_eq!(heads, [NodeId(0)]);
    }

    #[test]
    fn chain_is_fully_covered() {
        // a - b - c with scores rising toward c: c wins, b is covered, a must
        // still end up within r_c of a head.
        let t = topo(&[(540.0, 0.0), (500.0, 0.0), (460.0, 0.0)], (0.0, 0.0));
        let (heads, _) = elect_cluster_heads(&t, 45.0, false).unwrap();
        assert!(heads.contains(&NodeId(2)));
        assert!(heads.contains(&NodeId(0)));
    }

    #[test]
    fn sch_weight_values() {
        let mut t = topo(&[(0.0, 0.0)], (0.0, 0.0));
        t.nodes[0].e_res = 4.0;
        let w = sch_weight(&t, NodeId(0), 4, 1.0).unwrap();
        assert_relative_eq!(w.weight, 2.0);
        assert_relative_eq!(w.timer, 0.5);
        let w = sch_weight(&t, NodeId(0), 0, 1.0).unwrap();
        assert_eq!(w.weight, 0.0);
        assert!(w.timer.is_infinite());
    }

    #[test]
    fn layer_ranges() {
        assert_eq!(layer_range(3, 50.0, 300.0), 100.0);
        assert_eq!(layer_range(4, 50.0, 300.0), 150.0);
        assert_eq!(layer_range(5, 50.0, 300.0), 200.0);
        for layer in 3..40 {
            let r = layer_range(layer, 50.0, 300.0);
            assert!((50.0..300.0).contains(&r));
            let r = layer_range(layer, 50.0, 220.0);
            assert!(r <= 220.0);
        }
        assert!(!range_saturated(5, 50.0, 300.0));
        assert!(range_saturated(7, 50.0, 300.0));
    }

    #[test]
    fn earlier_timer_suppresses_neighbor() {
        // Lower heads 0 and 1; candidates 2 and 3 are 10 m apart and both see
        // two heads, but 2 has more energy and hence the shorter timer.
        let mut t = topo(&[(0.0, 0.0), (60.0, 0.0), (30.0, 5.0), (30.0, 15.0)], (0.0, 0.0));
        t.nodes[3].e_res = 4.0;
        let is_head = [true, true, false, false];
        let (heads, weights, traffic) =
            elect_super_cluster_heads(&t, &[NodeId(0), NodeId(1)], &is_head, 100.0, 1.0);
        assert_eq!(heads, [NodeId(2)]);
        assert_eq!(traffic.sch_adv, 1);
        assert_relative_eq!(weights[0].timer, 0.5);
        assert_relative_eq!(weights[1].timer, 1.0);
    }

    #[test]
    fn distant_candidates_both_elected() {
        let t = topo(&[(0.0, 0.0), (500.0, 0.0), (20.0, 0.0), (520.0, 0.0)], (0.0, 0.0));
        let is_head = [true, true, false, false];
        let (heads, _, _) =
            elect_super_cluster_heads(&t, &[NodeId(0), NodeId(1)], &is_head, 100.0, 1.0);
        assert_eq!(heads, [NodeId(2), NodeId(3)]);
    }
}
