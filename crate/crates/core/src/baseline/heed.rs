use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use super::{BaselineParams, ClusteringResult};
use crate::control::{broadcast, unicast, MessageKind};
use crate::model::{Hop, NodeId, Topology};

/// Average minimum reachability power of `i`: mean over its neighbors within
/// `r_c` of the amplifier cost at the smallest discrete power level reaching
/// them. Levels are evenly spaced over `[r_c / levels, r_c]`. Isolated nodes
/// cost 0.
pub fn amrp(t: &Topology, i: NodeId, neighbors: &[NodeId], r_c: f64, levels: u8) -> f64 {
    if neighbors.is_empty() {
        return 0.0;
    }
    let step = r_c / f64::from(levels.max(1));
    let total: f64 = neighbors
        .iter()
        .map(|&j| {
            let d = t.dist(i, j);
            let level = libm::ceil(d / step).max(1.0);
            let reach = level * step;
            reach * reach
        })
        .sum();
    total / neighbors.len() as f64
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Idle,
    Tentative,
    Final,
}

/// HEED election with AMRP as the communication cost.
///
/// Each node starts with probability `max(c_prob * E_res/E_max, p_min)` and
/// doubles it every iteration until it reaches 1. In each iteration nodes act
/// in ascending cost order (ties to the lower id), so announcements made
/// earlier in the iteration are already heard: a node whose cheapest announced
/// neighbor (itself included) is itself announces, finally once its
/// probability is 1; a node that has heard nobody announces tentatively with
/// its current probability. Afterwards every node that is not a final head
/// joins its cheapest final head within `r_c`, or becomes one.
///
/// One uniform draw is taken per undecided node per iteration, in that order.
pub fn heed_elect<R: Rng + ?Sized>(
    t: &Topology,
    params: &BaselineParams,
    r_c: f64,
    r_t: f64,
    rng: &mut R,
) -> ClusteringResult {
    let n = t.len();
    let table = t.neighbor_table(r_c);
    let mut result = ClusteringResult::new(t);
    let alive: Vec<NodeId> = t.alive_ids().collect();
    let mut cost = vec![0.0; n];
    let mut prob = vec![0.0; n];
    for &i in &alive {
        cost[i.index()] = amrp(t, i, table.of(i), r_c, params.heed_power_levels);
        prob[i.index()] =
            (params.heed_c_prob * t.nodes[i.index()].energy_fraction()).max(params.heed_p_min);
        result.control.push(broadcast(i, MessageKind::ChInf, r_c));
    }
    let cheaper = |a: NodeId, b: NodeId| -> Ordering {
        cost[a.index()].total_cmp(&cost[b.index()]).then(a.cmp(&b))
    };
    let mut order = alive.clone();
    order.sort_by(|&a, &b| cheaper(a, b));

    let mut status = vec![Status::Idle; n];
    let mut done = vec![false; n];
    while order.iter().any(|i| !done[i.index()]) {
        for &i in &order {
            if done[i.index()] {
                continue;
            }
            let p = prob[i.index()];
            let best = core::iter::once(i)
                .chain(table.of(i).iter().copied())
                .filter(|j| status[j.index()] != Status::Idle)
                .min_by(|&a, &b| cheaper(a, b));
            let announce = match best {
                Some(b) if b == i => Some(if p >= 1.0 { Status::Final } else { Status::Tentative }),
                Some(_) => None,
                None if p >= 1.0 => Some(Status::Final),
                None => (rng.gen::<f64>() < p).then_some(Status::Tentative),
            };
            if let Some(s) = announce {
                if status[i.index()] != s {
                    status[i.index()] = s;
                    result.control.push(broadcast(i, MessageKind::ChAdv, r_c));
                }
            }
            if p >= 1.0 {
                done[i.index()] = true;
            }
            prob[i.index()] = (2.0 * p).min(1.0);
        }
    }

    for &i in &order {
        if status[i.index()] == Status::Final {
            continue;
        }
        let head = table
            .of(i)
            .iter()
            .copied()
            .filter(|j| status[j.index()] == Status::Final)
            .min_by(|&a, &b| cheaper(a, b));
        match head {
            Some(h) => {
                result.membership[i.index()] = Some(h);
                result.intra_next[i.index()] = Some(h);
                result.control.push(unicast(i, MessageKind::JoinReqMember, Hop::Node(h)));
            }
            None => {
                status[i.index()] = Status::Final;
                result.control.push(broadcast(i, MessageKind::ChAdv, r_c));
            }
        }
    }
    result.ch_set = alive
        .iter()
        .copied()
        .filter(|i| status[i.index()] == Status::Final)
        .collect();
    result.route_heads(t, r_t);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::test_support::assert_well_formed;
    use crate::geometry::Position;
    use crate::model::deploy;
    use crate::{ScenarioConfig, SimRng};
    use rand::SeedableRng;

    #[test]
    fn amrp_levels() {
        let pts = [Position::new(0.0, 0.0), Position::new(10.0, 0.0), Position::new(30.0, 0.0)];
        let t = Topology::from_positions(&pts, Position::new(0.0, 500.0), 100.0, 1.0);
        // Levels 12.5, 25, 37.5, 50: 10 m needs 12.5, 30 m needs 37.5.
        let c = amrp(&t, NodeId(0), &[NodeId(1), NodeId(2)], 50.0, 4);
        assert!((c - (12.5f64.powi(2) + 37.5f64.powi(2)) / 2.0).abs() < 1e-9);
        assert_eq!(amrp(&t, NodeId(0), &[], 50.0, 4), 0.0);
    }

    fn star() -> Topology {
        // Hub 25 m from four spokes; the hub's neighbors are all at the
        // second power level, the spokes also reach each other farther out.
        let pts = [
            Position::new(100.0, 100.0),
            Position::new(125.0, 100.0),
            Position::new(75.0, 100.0),
            Position::new(100.0, 125.0),
            Position::new(100.0, 75.0),
        ];
        Topology::from_positions(&pts, Position::new(100.0, 400.0), 200.0, 1.0)
    }

    #[test]
    fn cheapest_node_wins_when_everyone_starts_certain() {
        let t = star();
        let table = t.neighbor_table(50.0);
        assert_eq!(amrp(&t, NodeId(0), table.of(NodeId(0)), 50.0, 4), 625.0);
        let spoke = (625.0 + 2.0 * 37.5f64.powi(2) + 2500.0) / 4.0;
        assert!((amrp(&t, NodeId(1), table.of(NodeId(1)), 50.0, 4) - spoke).abs() < 1e-9);
        let params = BaselineParams { heed_c_prob: 1.0, ..BaselineParams::default() };
        let mut rng = SimRng::seed_from_u64(0);
        let r = heed_elect(&t, &params, 50.0, 300.0, &mut rng);
        assert_eq!(r.ch_set, [NodeId(0)]);
        assert_well_formed(&t, &r);
    }

    #[test]
    fn fully_connected_cluster_gets_one_head() {
        let t = star();
        for seed in 0..20 {
            let mut rng = SimRng::seed_from_u64(seed);
            let r = heed_elect(&t, &BaselineParams::default(), 50.0, 300.0, &mut rng);
            assert_eq!(r.ch_set.len(), 1, "seed {seed}");
            assert_well_formed(&t, &r);
        }
    }

    #[test]
    fn dead_nodes_never_elected() {
        let mut t = deploy(&ScenarioConfig::scenario1(), 5).unwrap();
        for k in (0..t.len()).step_by(3) {
            t.nodes[k].e_res = 0.0;
            t.nodes[k].alive = false;
        }
        let mut rng = SimRng::seed_from_u64(5);
        let r = heed_elect(&t, &BaselineParams::default(), 50.0, 300.0, &mut rng);
        assert!(r.ch_set.iter().all(|h| h.index() % 3 != 0));
        assert_well_formed(&t, &r);
    }

    #[test]
    fn every_member_within_cluster_range() {
        for seed in 0..20 {
            let t = deploy(&ScenarioConfig::scenario1(), seed).unwrap();
            let mut rng = SimRng::seed_from_u64(seed);
            let r = heed_elect(&t, &BaselineParams::default(), 50.0, 300.0, &mut rng);
            assert_well_formed(&t, &r);
            for i in t.alive_ids() {
                if let Some(h) = r.membership[i.index()] {
                    assert!(t.dist(i, h) <= 50.0);
                }
            }
        }
    }
}
