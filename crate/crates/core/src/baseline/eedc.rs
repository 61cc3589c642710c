use alloc::vec::Vec;

use super::ClusteringResult;
use crate::control::{broadcast, MessageKind};
use crate::model::{NodeId, Topology};

/// EEDC: local energy competition plus a distance condition.
///
/// A node is a candidate when no alive node within `r_comp` has more residual
/// energy (equal energy goes to the lower id). Candidates are then accepted
/// from most to least energy, skipping any closer than `d_thr` to an accepted
/// head. Members join the nearest head.
pub fn eedc_elect(t: &Topology, d_thr: f64, r_comp: f64, r_t: f64) -> ClusteringResult {
    let table = t.neighbor_table(r_comp);
    let mut result = ClusteringResult::new(t);
    let beats = |a: NodeId, b: NodeId| {
        let (ea, eb) = (t.nodes[a.index()].e_res, t.nodes[b.index()].e_res);
        ea > eb || (ea == eb && a < b)
    };
    let mut candidates: Vec<NodeId> = Vec::new();
    for i in t.alive_ids() {
        result.control.push(broadcast(i, MessageKind::ChInf, r_comp));
        if table.of(i).iter().all(|&j| beats(i, j)) {
            candidates.push(i);
        }
    }
    candidates.sort_by(|&a, &b| {
        t.nodes[b.index()]
            .e_res
            .total_cmp(&t.nodes[a.index()].e_res)
            .then(a.cmp(&b))
    });
    let mut heads: Vec<NodeId> = Vec::new();
    for &c in &candidates {
        if heads.iter().all(|&h| t.dist(c, h) >= d_thr) {
            heads.push(c);
            result.control.push(broadcast(c, MessageKind::ChAdv, r_t));
        }
    }
    heads.sort_unstable();
    result.ch_set = heads;
    result.join_nearest(t, None);
    result.route_heads(t, r_t);
    result
}
