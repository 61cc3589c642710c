use alloc::vec;
use alloc::vec::Vec;

use super::{BaselineParams, ClusteringResult};
use crate::control::{broadcast, unicast, MessageKind};
use crate::model::{Hop, NodeId, Topology};
use crate::radio::{rx_energy_unchecked, tx_energy_unchecked, RadioParams};

/// DWEHC weight: residual energy fraction times `Σ (R - d) / 6R` over the
/// neighbors within the cluster range `R`.
pub fn dwehc_weight(t: &Topology, i: NodeId, neighbors: &[NodeId], range: f64) -> f64 {
    let closeness: f64 = neighbors
        .iter()
        .map(|&j| (range - t.dist(i, j)) / (6.0 * range))
        .sum();
    t.nodes[i.index()].energy_fraction() * closeness
}

/// DWEHC clustering with multi-hop intra-cluster delivery.
///
/// Heads are elected by weight (highest first, lower id on ties), each
/// excluding its neighbors within `range`. Members join the nearest head in
/// range and, visiting them by increasing distance to the head, pick as first
/// hop whichever already-placed member (or the head) minimizes the energy to
/// deliver one frame: sender transmit plus relay receive and forward costs.
/// Paths are limited to `dwehc_max_hops` hops.
pub fn dwehc_elect(
    t: &Topology,
    params: &BaselineParams,
    radio: &RadioParams,
    frame_bits: u64,
    range: f64,
    r_t: f64,
) -> ClusteringResult {
    let n = t.len();
    let table = t.neighbor_table(range);
    let mut result = ClusteringResult::new(t);
    let mut ranked: Vec<(f64, NodeId)> = t
        .alive_ids()
        .map(|i| (dwehc_weight(t, i, table.of(i), range), i))
        .collect();
    for &(_, i) in &ranked {
        result.control.push(broadcast(i, MessageKind::ChInf, range));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut covered = vec![false; n];
    for &(_, i) in &ranked {
        if covered[i.index()] {
            continue;
        }
        result.ch_set.push(i);
        covered[i.index()] = true;
        for &j in table.of(i) {
            covered[j.index()] = true;
        }
        result.control.push(broadcast(i, MessageKind::ChAdv, range));
    }
    result.ch_set.sort_unstable();

    // Members per head, nearest head in range.
    let mut clusters: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for i in t.alive_ids() {
        if result.is_head(i) {
            continue;
        }
        let head = table
            .of(i)
            .iter()
            .copied()
            .filter(|&j| result.is_head(j))
            .min_by(|&a, &b| t.dist(i, a).total_cmp(&t.dist(i, b)).then(a.cmp(&b)))
            .expect("weight election covers every node");
        result.membership[i.index()] = Some(head);
        clusters[head.index()].push(i);
    }

    let rx = rx_energy_unchecked(radio, frame_bits);
    let max_hops = params.dwehc_max_hops.max(1);
    // (delivery cost to the head, hops to the head) per placed node
    let mut placed: Vec<Option<(f64, u8)>> = vec![None; n];
    for &h in &result.ch_set {
        placed[h.index()] = Some((0.0, 0));
        let mut members = core::mem::take(&mut clusters[h.index()]);
        members.sort_by(|&a, &b| t.dist(a, h).total_cmp(&t.dist(b, h)).then(a.cmp(&b)));
        let mut ready: Vec<NodeId> = vec![h];
        for &u in &members {
            let mut best = (tx_energy_unchecked(radio, frame_bits, t.dist(u, h)), 1u8, h);
            for &v in ready.iter().skip(1) {
                let (cost_v, hops_v) = placed[v.index()].unwrap();
                let d = t.dist(u, v);
                if d > range || hops_v + 1 > max_hops {
                    continue;
                }
                let via = tx_energy_unchecked(radio, frame_bits, d) + rx + cost_v;
                if via < best.0 {
                    best = (via, hops_v + 1, v);
                }
            }
            placed[u.index()] = Some((best.0, best.1));
            result.intra_next[u.index()] = Some(best.2);
            result
                .control
                .push(unicast(u, MessageKind::JoinReqMember, Hop::Node(best.2)));
            ready.push(u);
        }
    }
    result.route_heads(t, r_t);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::test_support::assert_well_formed;
    use crate::geometry::Position;
    use crate::model::deploy;
    use crate::ScenarioConfig;

    #[test]
    fn isolated_node_heads_itself() {
        let t = Topology::from_positions(&[Position::new(0.0, 0.0), Position::new(400.0, 0.0)], Position::new(200.0, 0.0), 500.0, 1.0);
        let r = dwehc_elect(&t, &BaselineParams::default(), &RadioParams::table_one(), 4000, 50.0, 300.0);
        assert_eq!(r.ch_set, [NodeId(0), NodeId(1)]);
        assert_well_formed(&t, &r);
    }

    fn check_relays(t: &Topology, r: &ClusteringResult, radio: &RadioParams, range: f64) -> usize {
        let mut multi = 0;
        for i in t.alive_ids() {
            let Some(head) = r.membership[i.index()] else { continue };
            let mut hops = Vec::new();
            let mut cur = i;
            while cur != head {
                let next = r.intra_next[cur.index()].unwrap();
                assert!(t.dist(cur, next) <= range, "hop {cur}->{next} too long");
                hops.push(t.dist(cur, next));
                cur = next;
            }
            if hops.len() > 1 {
                multi += 1;
                let relayed: f64 = hops.iter().map(|&d| tx_energy_unchecked(radio, 4000, d)).sum();
                let direct = tx_energy_unchecked(radio, 4000, t.dist(i, head));
                assert!(relayed <= direct, "member {i}: {relayed} > {direct}");
            }
        }
        multi
    }

    #[test]
    fn relays_only_when_cheaper() {
        let radio = RadioParams::table_one();
        let mut multi = 0;
        for seed in 0..20 {
            let t = deploy(&ScenarioConfig { n_nodes: 400, ..ScenarioConfig::scenario1() }, seed).unwrap();
            // A wide cluster range puts members in the multipath regime.
            let r = dwehc_elect(&t, &BaselineParams::default(), &radio, 4000, 200.0, 300.0);
            assert_well_formed(&t, &r);
            multi += check_relays(&t, &r, &radio, 200.0);
            let r = dwehc_elect(&t, &BaselineParams::default(), &radio, 4000, 50.0, 300.0);
            assert_well_formed(&t, &r);
            check_relays(&t, &r, &radio, 50.0);
        }
        assert!(multi > 0, "wide clusters should produce relayed members");
    }
}
