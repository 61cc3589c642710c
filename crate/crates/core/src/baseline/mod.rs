//! Baseline clustering protocols: LEACH, HEED, DWEHC and EEDC.
//!
//! Each follows the core election rule of its original publication at the
//! fidelity needed for energy and lifetime comparison. All of them deliver
//! aggregated cluster frames to the base station over greedy geographic
//! multi-hop between cluster heads (see [`routing`]).

mod dwehc;
mod eedc;
mod heed;
mod leach;
pub mod routing;

pub use dwehc::{dwehc_elect, dwehc_weight};
pub use eedc::eedc_elect;
pub use heed::{amrp, heed_elect};
pub use leach::{leach_elect, leach_threshold, LeachState};

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::control::{unicast, ControlMessage, ControlTraffic, MessageKind};
use crate::error::{Error, Result};
use crate::model::{Hop, NodeId, Topology};

/// LEACH head probabilities averaged in comparisons.
pub const LEACH_P_SWEEP: [f64; 3] = [0.05, 0.10, 0.15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineParams {
    /// Desired fraction of LEACH cluster heads per round.
    pub leach_p: f64,
    /// Initial HEED cluster head probability before energy scaling.
    pub heed_c_prob: f64,
    /// Floor of the HEED cluster head probability.
    pub heed_p_min: f64,
    /// Number of discrete transmit power levels spanning `[r_c/4, r_c]`.
    pub heed_power_levels: u8,
    /// Maximum hops from a DWEHC member to its head.
    pub dwehc_max_hops: u8,
    /// Minimum distance between EEDC heads (m).
    pub eedc_d_thr: f64,
    /// EEDC local competition range (m).
    pub eedc_r_comp: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            leach_p: 0.10,
            heed_c_prob: 0.05,
            heed_p_min: 1e-4,
            heed_power_levels: 4,
            dwehc_max_hops: 3,
            eedc_d_thr: 30.0,
            eedc_r_comp: 25.0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.leach_p > 0.0 && self.leach_p < 1.0) {
            return Err(Error::config("leach_p", "must lie in (0, 1)"));
        }
        if !(self.heed_c_prob > 0.0 && self.heed_c_prob <= 1.0) {
            return Err(Error::config("heed_c_prob", "must lie in (0, 1]"));
        }
        if !(self.heed_p_min > 0.0 && self.heed_p_min <= self.heed_c_prob) {
            return Err(Error::config("heed_p_min", "must lie in (0, heed_c_prob]"));
        }
        if self.heed_power_levels == 0 {
            return Err(Error::config("heed_power_levels", "must be at least 1"));
        }
        if self.dwehc_max_hops == 0 {
            return Err(Error::config("dwehc_max_hops", "must be at least 1"));
        }
        if !(self.eedc_d_thr > 0.0) {
            return Err(Error::config("eedc_d_thr", "must be positive"));
        }
        if !(self.eedc_r_comp > 0.0) {
            return Err(Error::config("eedc_r_comp", "must be positive"));
        }
        Ok(())
    }
}

/// Cluster structure of one baseline round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub ch_set: Vec<NodeId>,
    /// Head of each alive member; `None` for heads and dead nodes.
    pub membership: Vec<Option<NodeId>>,
    /// First hop of each member toward its head (the head itself unless the
    /// protocol relays inside the cluster).
    pub intra_next: Vec<Option<NodeId>>,
    /// Next hop of each head toward the base station.
    pub inter_ch_routes: Vec<Option<Hop>>,
    /// Heads whose route needs a hop longer than the transmission range.
    pub long_links: Vec<NodeId>,
    pub control: Vec<ControlMessage>,
}

impl ClusteringResult {
    /// Empty result sized for `t`.
    pub(crate) fn new(t: &Topology) -> Self {
        let n = t.len();
        Self {
            ch_set: Vec::new(),
            membership: vec![None; n],
            intra_next: vec![None; n],
            inter_ch_routes: vec![None; n],
            long_links: Vec::new(),
            control: Vec::new(),
        }
    }

    pub fn is_head(&self, i: NodeId) -> bool {
        self.ch_set.binary_search(&i).is_ok()
    }

    pub fn traffic(&self) -> ControlTraffic {
        ControlTraffic::from_log(&self.control)
    }

    /// Node sequence from `i` to the base station: intra-cluster hops, then the
    /// inter-head route.
    pub fn path_to_bs(&self, i: NodeId) -> Option<Vec<Hop>> {
        let mut path = vec![Hop::Node(i)];
        let mut cur = i;
        let limit = self.membership.len() + 1;
        while !self.is_head(cur) {
            cur = self.intra_next.get(cur.index()).copied().flatten()?;
            path.push(Hop::Node(cur));
            if path.len() > limit {
                return None;
            }
        }
        loop {
            match self.inter_ch_routes.get(cur.index()).copied().flatten()? {
                Hop::BaseStation => {
                    path.push(Hop::BaseStation);
                    return Some(path);
                }
                Hop::Node(next) => {
                    path.push(Hop::Node(next));
                    cur = next;
                }
            }
            if path.len() > 2 * limit {
                return None;
            }
        }
    }

    /// Members join the nearest head (any distance) and send it a join request.
    pub(crate) fn join_nearest(&mut self, t: &Topology, max_range: Option<f64>) {
        let heads = self.ch_set.clone();
        for i in t.alive_ids() {
            if self.is_head(i) {
                continue;
            }
            let best = heads
                .iter()
                .map(|&h| (t.dist(i, h), h))
                .filter(|&(d, _)| max_range.is_none_or(|r| d <= r))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((_, h)) = best {
                self.membership[i.index()] = Some(h);
                self.intra_next[i.index()] = Some(h);
                self.control
                    .push(unicast(i, MessageKind::JoinReqMember, Hop::Node(h)));
            }
        }
    }

    /// Fill `inter_ch_routes` with greedy geographic next hops among heads.
    pub(crate) fn route_heads(&mut self, t: &Topology, r_t: f64) {
        let routes = routing::greedy_routes(t, &self.ch_set, r_t);
        for (h, hop, long) in routes {
            self.inter_ch_routes[h.index()] = Some(hop);
            if long {
                self.long_links.push(h);
            }
        }
    }
}
