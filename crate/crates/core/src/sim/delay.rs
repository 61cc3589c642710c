use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::DelayParams;
use crate::baseline::routing::{flat_route, greedy_path};
use crate::eema::AggregationTree;
use crate::error::{Error, Result};
use crate::geometry::{GridIndex, Position};
use crate::model::{Hop, NodeId, Topology};

/// Delay of a route given as positions from the source to the base station.
///
/// Link time is distance times `t_u_per_meter`. Hop-by-hop routes add `t_p`
/// at each of the `m - 2` relays (`m` counts every position, base station
/// included); predetermined routes skip it. `aggregation_wait` applies at
/// every relay either way.
pub fn path_delay(path: &[Position], dp: &DelayParams, predetermined: bool) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::Domain("a path needs at least two positions"));
    }
    let links: f64 = path.windows(2).map(|w| w[0].distance(&w[1])).sum();
    let relays = (path.len() - 2) as f64;
    let per_relay = if predetermined { 0.0 } else { dp.t_p } + dp.aggregation_wait;
    Ok(links * dp.t_u_per_meter + relays * per_relay)
}

fn positions(t: &Topology, hops: &[Hop]) -> Vec<Position> {
    hops.iter().map(|&h| t.hop_position(h)).collect()
}

/// Greedy node-to-node route from `source` through alive nodes within
/// `hop_range`.
pub fn flat_path(t: &Topology, source: NodeId, hop_range: f64) -> Vec<Position> {
    let index = t.alive_index(hop_range);
    positions(t, &flat_route(t, source, &index, hop_range))
}

/// Two-tier route: source to its nearest cluster head, then greedy
/// head-to-head hops within `r_t`.
pub fn two_tier_path(t: &Topology, source: NodeId, cluster_heads: &[NodeId], r_t: f64) -> Vec<Position> {
    let index = GridIndex::new(cluster_heads.iter().map(|&h| (h.0, t.pos(h))), r_t);
    let first = if cluster_heads.binary_search(&source).is_ok() {
        None
    } else {
        cluster_heads
            .iter()
            .copied()
            .min_by(|&a, &b| t.dist(source, a).total_cmp(&t.dist(source, b)).then(a.cmp(&b)))
    };
    let mut hops = Vec::from([Hop::Node(source)]);
    let head = match first {
        Some(h) => {
            hops.push(Hop::Node(h));
            h
        }
        None => source,
    };
    hops.extend(greedy_path(t, head, &index, r_t).into_iter().skip(1));
    positions(t, &hops)
}

/// Delays from the same source under the three architectures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayComparison {
    pub source: NodeId,
    /// Predetermined route up the EEMA tree.
    pub eema: f64,
    /// Cluster heads plus greedy inter-head forwarding.
    pub two_tier: f64,
    /// Greedy node-to-node forwarding within `r_c`.
    pub flat: f64,
}

/// Farthest alive node from the base station (lowest id on ties).
pub(crate) fn farthest_source(t: &Topology) -> Option<NodeId> {
    t.alive_ids()
        .max_by(|&a, &b| t.dist_bs(a).total_cmp(&t.dist_bs(b)).then(b.cmp(&a)))
}

pub(crate) fn tree_delay(t: &Topology, tree: &AggregationTree, source: NodeId, dp: &DelayParams) -> Result<f64> {
    let hops = tree
        .path_to_bs(source)
        .ok_or(Error::Domain("source does not reach the base station"))?;
    path_delay(&positions(t, &hops), dp, true)
}

/// Compare the three architectures from the farthest alive node.
pub fn probe_delays(t: &Topology, tree: &AggregationTree, r_c: f64, r_t: f64, dp: &DelayParams) -> Result<DelayComparison> {
    let source = farthest_source(t).ok_or(Error::EmptyNetwork)?;
    let mut heads = tree.cluster_heads().to_vec();
    heads.sort_unstable();
    Ok(DelayComparison {
        source,
        eema: tree_delay(t, tree, source, dp)?,
        two_tier: path_delay(&two_tier_path(t, source, &heads, r_t), dp, false)?,
        flat: path_delay(&flat_path(t, source, r_c), dp, false)?,
    })
}

/// First hop of `from` under flat forwarding, exposed for tests.
#[cfg(test)]
fn flat_next(t: &Topology, from: NodeId, r: f64) -> Hop {
    crate::baseline::routing::greedy_next_hop(t, from, &t.alive_index(r), r).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::closed_form_delay;

    fn line(n: usize) -> Vec<Position> {
        (0..n).map(|k| Position::new(k as f64, 0.0)).collect()
    }

    #[test]
    fn uniform_links() {
        let dp = DelayParams::default();
        assert_eq!(path_delay(&line(5), &dp, false).unwrap(), 34.0);
        assert_eq!(path_delay(&line(5), &dp, true).unwrap(), 4.0);
        assert_eq!(path_delay(&line(2), &dp, false).unwrap(), 1.0);
        assert!(path_delay(&line(1), &dp, false).is_err());
    }

    #[test]
    fn agrees_with_closed_form() {
        let dp = DelayParams::default();
        for m in 2..40u32 {
            for pre in [false, true] {
                let a = path_delay(&line(m as usize), &dp, pre).unwrap();
                let b = closed_form_delay(m, 1.0, 10.0, pre).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn aggregation_wait_applies_per_relay() {
        let dp = DelayParams { aggregation_wait: 2.0, ..DelayParams::default() };
        assert_eq!(path_delay(&line(5), &dp, true).unwrap(), 4.0 + 3.0 * 2.0);
    }

    #[test]
    fn flat_route_hops_through_neighbors() {
        let pts: Vec<Position> = (1..=4).map(|k| Position::new(40.0 * k as f64, 0.0)).collect();
        let t = Topology::from_positions(&pts, Position::new(0.0, 0.0), 200.0, 1.0);
        assert_eq!(flat_next(&t, NodeId(3), 50.0), Hop::Node(NodeId(2)));
        let p = flat_path(&t, NodeId(3), 50.0);
        assert_eq!(p.len(), 5);
        assert_eq!(path_delay(&p, &DelayParams::default(), false).unwrap(), 160.0 + 30.0);
    }

    #[test]
    fn two_tier_route_goes_through_nearest_head() {
        let pts = [Position::new(400.0, 0.0), Position::new(380.0, 0.0), Position::new(200.0, 0.0)];
        let t = Topology::from_positions(&pts, Position::new(0.0, 0.0), 500.0, 1.0);
        let p = two_tier_path(&t, NodeId(0), &[NodeId(1), NodeId(2)], 300.0);
        assert_eq!(p, [pts[0], pts[1], pts[2], Position::new(0.0, 0.0)]);
    }
}
