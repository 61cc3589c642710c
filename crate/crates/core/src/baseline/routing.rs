//! Greedy geographic forwarding toward the base station.

use alloc::vec::Vec;

use crate::geometry::GridIndex;
use crate::model::{Hop, NodeId, Topology};

/// Next hop from `from` among `relays`: the nearest relay within `max_hop`
/// that is strictly closer to the base station, unless the base station itself
/// is at least as near. Returns the hop and whether it exceeds `max_hop` (only
/// possible when falling back to the base station).
pub fn greedy_next_hop(
    t: &Topology,
    from: NodeId,
    relays: &GridIndex,
    max_hop: f64,
) -> (Hop, bool) {
    let p = t.pos(from);
    let d_bs = p.distance(&t.bs);
    let mut best: Option<(f64, NodeId)> = None;
    relays.for_each_candidate(&p, max_hop, |k| {
        let c = NodeId(k);
        if c == from {
            return;
        }
        let d = t.pos(c).distance(&p);
        if d > max_hop || t.dist_bs(c) >= d_bs {
            return;
        }
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && c < bid),
        };
        if better {
            best = Some((d, c));
        }
    });
    match best {
        Some((d, c)) if d < d_bs => (Hop::Node(c), false),
        _ => (Hop::BaseStation, d_bs > max_hop),
    }
}

/// Node-to-node variant for flat networks. A node with no closer relay in
/// range hands the frame to the nearest strictly closer node at any distance
/// rather than jumping straight to a far base station; the flag marks a hop
/// beyond `max_hop`.
pub fn flat_next_hop(t: &Topology, from: NodeId, relays: &GridIndex, max_hop: f64) -> (Hop, bool) {
    let (hop, long) = greedy_next_hop(t, from, relays, max_hop);
    if !long {
        return (hop, false);
    }
    let d_bs = t.dist_bs(from);
    let nearest = t
        .alive_ids()
        .filter(|&c| c != from && t.dist_bs(c) < d_bs)
        .map(|c| (t.dist(from, c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match nearest {
        Some((d, c)) if d < d_bs => (Hop::Node(c), true),
        _ => (Hop::BaseStation, true),
    }
}

/// Full flat path from `from` to the base station, see [`flat_next_hop`].
pub fn flat_route(t: &Topology, from: NodeId, relays: &GridIndex, max_hop: f64) -> Vec<Hop> {
    let mut path = alloc::vec![Hop::Node(from)];
    let mut cur = from;
    loop {
        match flat_next_hop(t, cur, relays, max_hop).0 {
            Hop::BaseStation => {
                path.push(Hop::BaseStation);
                return path;
            }
            Hop::Node(n) => {
                path.push(Hop::Node(n));
                cur = n;
            }
        }
    }
}

/// Greedy route table over `heads`: `(head, next hop, over-range)`.
pub fn greedy_routes(t: &Topology, heads: &[NodeId], max_hop: f64) -> Vec<(NodeId, Hop, bool)> {
    let index = GridIndex::new(heads.iter().map(|&h| (h.0, t.pos(h))), max_hop);
    heads
        .iter()
        .map(|&h| {
            let (hop, long) = greedy_next_hop(t, h, &index, max_hop);
            (h, hop, long)
        })
        .collect()
}

/// Full greedy path from `from` to the base station through `relays`.
pub fn greedy_path(t: &Topology, from: NodeId, relays: &GridIndex, max_hop: f64) -> Vec<Hop> {
    let mut path = alloc::vec![Hop::Node(from)];
    let mut cur = from;
    loop {
        match greedy_next_hop(t, cur, relays, max_hop).0 {
            Hop::BaseStation => {
                path.push(Hop::BaseStation);
                return path;
            }
            Hop::Node(n) => {
                path.push(Hop::Node(n));
                cur = n;
            }
        }
    }
}
