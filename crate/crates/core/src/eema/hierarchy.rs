use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::election::{
    elect_cluster_heads_with, elect_super_cluster_heads_with, layer_range, range_saturated,
};
use super::{EemaParams, LayerPolicy, StrandedPolicy, MAX_LAYER};
use crate::control::{unicast, ControlLog, ControlMessage, ControlTraffic, MessageKind};
use crate::error::{Error, Result};
use crate::model::{Hop, NodeId, Role, ScenarioConfig, Topology};
use crate::radio::{tx_energy, RadioParams};

/// Routing structure of one EEMA round, rooted at the base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationTree {
    /// `layers[0]` are the cluster heads (layer 2); `layers[k]` the super
    /// cluster heads elected for layer `k + 2`.
    pub layers: Vec<Vec<NodeId>>,
    /// Super cluster range used to elect each entry of `layers` (`r_c` for the
    /// cluster head layer).
    pub ranges: Vec<f64>,
    /// Indexed by node id; `None` for dead nodes.
    pub parent: Vec<Option<Hop>>,
    pub backup: Vec<Option<NodeId>>,
    /// 0 for dead nodes, 1 for regular nodes, otherwise the highest layer the
    /// head serves at.
    pub node_layer: Vec<u8>,
    /// Heads that found no above-layer parent and moved up a layer themselves.
    pub promoted: Vec<NodeId>,
    /// Heads whose uplink is longer than `r_t`.
    pub long_links: Vec<NodeId>,
    /// Regular nodes with no cluster head in range.
    pub orphans: Vec<NodeId>,
    pub control: Vec<ControlMessage>,
}

impl AggregationTree {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn cluster_heads(&self) -> &[NodeId] {
        &self.layers[0]
    }

    pub fn super_cluster_heads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.layers.iter().skip(1).flatten().copied()
    }

    pub fn is_head(&self, i: NodeId) -> bool {
        self.node_layer[i.index()] >= 2
    }

    /// Heads whose parent is the base station.
    pub fn top_heads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.parent.iter().enumerate().filter_map(|(i, p)| {
            let id = NodeId(i as u32);
            (*p == Some(Hop::BaseStation) && self.is_head(id)).then_some(id)
        })
    }

    pub fn traffic(&self) -> ControlTraffic {
        ControlTraffic::from_log(&self.control)
    }

    /// Count of structural anomalies (orphans and over-range links).
    pub fn flags(&self) -> usize {
        self.orphans.len() + self.long_links.len()
    }

    /// Follow parents from `i` to the base station. `None` if the walk does not
    /// terminate within `n` steps.
    pub fn path_to_bs(&self, i: NodeId) -> Option<Vec<Hop>> {
        let mut path = vec![Hop::Node(i)];
        let mut cur = i;
        for _ in 0..=self.parent.len() {
            match self.parent.get(cur.index()).copied().flatten()? {
                Hop::BaseStation => {
                    path.push(Hop::BaseStation);
                    return Some(path);
                }
                Hop::Node(p) => {
                    path.push(Hop::Node(p));
                    cur = p;
                }
            }
        }
        None
    }

    /// Write roles, layers, parents and backups into the topology.
    pub fn apply(&self, t: &mut Topology) {
        for n in &mut t.nodes {
            n.reset_role();
            if !n.alive {
                continue;
            }
            let i = n.id.index();
            n.layer = self.node_layer[i];
            n.role = match n.layer {
                0 | 1 => Role::Regular,
                2 => Role::ClusterHead,
                _ => Role::SuperClusterHead,
            };
            n.parent = self.parent[i];
            n.backup = self.backup[i];
        }
    }
}

/// Build the full hierarchy for the alive nodes of `t`.
///
/// Cluster heads are elected first. Layer by layer, the heads still lacking a
/// parent (`pending`) then run a super cluster head race with the layer's
/// range and join the nearest new head within that range; a head with none in
/// range moves up a layer unchanged. Under [`LayerPolicy::Adaptive`] a pending
/// head within the current range of the base station joins it directly, and
/// layering stops when every pending head is within `r_t` of the base station
/// or once the range has saturated. The remaining heads then talk to the base
/// station; see [`StrandedPolicy`] for those beyond `r_t`. Regular nodes join
/// their nearest cluster head last.
pub fn build_hierarchy(
    t: &Topology,
    cfg: &ScenarioConfig,
    params: &EemaParams,
) -> Result<(AggregationTree, ControlTraffic)> {
    if t.alive_count() == 0 {
        return Err(Error::EmptyNetwork);
    }
    let n = t.len();
    let r_c = cfg.r_c;
    let table = t.neighbor_table(r_c);
    let mut log = ControlLog::new();
    let chs = elect_cluster_heads_with(t, &table, params.invert_centrality, &mut log)?;

    let mut tree = AggregationTree {
        layers: vec![chs.clone()],
        ranges: vec![r_c],
        parent: vec![None; n],
        backup: vec![None; n],
        node_layer: t.nodes.iter().map(|nd| u8::from(nd.alive)).collect(),
        promoted: Vec::new(),
        long_links: Vec::new(),
        orphans: Vec::new(),
        control: Vec::new(),
    };
    let mut is_head = vec![false; n];
    for &h in &chs {
        is_head[h.index()] = true;
        tree.node_layer[h.index()] = 2;
    }

    let adaptive = params.layers == LayerPolicy::Adaptive;
    let top = match params.layers {
        LayerPolicy::Adaptive => MAX_LAYER,
        LayerPolicy::Fixed(l) => l.clamp(2, MAX_LAYER),
    };
    let mut pending = chs;
    // `level` drives the range schedule; it can run ahead of the number of
    // built layers when a race elects nobody.
    let mut level: u8 = 2;
    while !pending.is_empty() {
        let built = tree.layers.len() as u8 + 1;
        if built >= top || level >= MAX_LAYER {
            break;
        }
        let next_level = level + 1;
        let r_s = layer_range(next_level, r_c, cfg.r_t);
        if adaptive {
            if pending.iter().all(|&h| t.dist_bs(h) <= cfg.r_t) {
                break;
            }
            pending.retain(|&h| {
                let near = t.dist_bs(h) <= r_s;
                if near {
                    tree.parent[h.index()] = Some(Hop::BaseStation);
                }
                !near
            });
            if pending.is_empty() {
                break;
            }
        }

        let (schs, _) =
            elect_super_cluster_heads_with(t, &pending, &is_head, r_s, params.alpha, &mut log);
        let saturated = range_saturated(next_level, r_c, cfg.r_t);
        level = next_level;
        if schs.is_empty() {
            if saturated || !t.alive_ids().any(|i| !is_head[i.index()]) {
                break;
            }
            continue;
        }
        let layer = built + 1;
        for &s in &schs {
            is_head[s.index()] = true;
            tree.node_layer[s.index()] = layer;
        }

        let mut carried = Vec::new();
        for &h in &pending {
            let mut options: Vec<(f64, NodeId)> = schs
                .iter()
                .map(|&s| (t.dist(h, s), s))
                .filter(|&(d, _)| d <= r_s)
                .collect();
            options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            match options.first() {
                Some(&(_, p)) => {
                    tree.parent[h.index()] = Some(Hop::Node(p));
                    tree.backup[h.index()] = options.get(1).map(|&(_, b)| b);
                    log.push(unicast(h, MessageKind::JoinReqHead, Hop::Node(p)));
                }
                None => {
                    tree.node_layer[h.index()] = layer;
                    tree.promoted.push(h);
                    carried.push(h);
                }
            }
        }
        tree.layers.push(schs.clone());
        tree.ranges.push(r_s);
        carried.extend(schs);
        carried.sort_unstable();
        pending = carried;
        if adaptive && saturated {
            break;
        }
    }
    connect_top(t, &mut tree, &pending, cfg.r_t, &cfg.radio, params.stranded, &mut log);

    for j in join_members(t, &tree.layers[0], r_c, &is_head) {
        let i = j.node.index();
        tree.parent[i] = Some(Hop::Node(j.parent));
        tree.backup[i] = j.backup;
        if j.orphan {
            tree.orphans.push(j.node);
        }
        log.push(unicast(j.node, MessageKind::JoinReqMember, Hop::Node(j.parent)));
    }
    tree.promoted.sort_unstable();
    tree.promoted.dedup();
    tree.long_links.sort_unstable();
    let traffic = ControlTraffic::from_log(&log);
    tree.control = log;
    Ok((tree, traffic))
}

/// Connect the last pending heads. Heads within `r_t` go to the base station.
/// Farther ones, nearest first, either relay through a head that already
/// reaches the base station and is closer to it, or (when no such head exists
/// or the policy says so) transmit directly. Among relays within `r_t` the one
/// whose whole route costs least radio energy per bit wins; a relay beyond
/// `r_t` is used only if none is in range. Links beyond `r_t` are recorded in `long_links`.

fn connect_top(
    t: &Topology,
    tree: &mut AggregationTree,
    heads: &[NodeId],
    r_t: f64,
    radio: &RadioParams,
    policy: StrandedPolicy,
    log: &mut ControlLog,
) {
    let mut far: Vec<NodeId> = Vec::new();
    for &h in heads {
        if t.dist_bs(h) <= r_t || policy == StrandedPolicy::Direct {
            tree.parent[h.index()] = Some(Hop::BaseStation);
            if t.dist_bs(h) > r_t {
                tree.long_links.push(h);
            }
        } else {
            far.push(h);
        }
    }
    far.sort_by(|&a, &b| t.dist_bs(a).total_cmp(&t.dist_bs(b)).then(a.cmp(&b)));
    for &h in &far {
        let d_h = t.dist_bs(h);
        let relay = t
            .alive_ids()
            .filter(|&x| x != h && tree.node_layer[x.index()] >= 2 && t.dist_bs(x) < d_h && t.dist(h, x) < d_h)
            .filter_map(|x| {
                let first = hop_cost(radio, t.dist(h, x)) + radio.e_el;
                route_cost(t, tree, radio, x).map(|c| (t.dist(h, x) > r_t, first + c, x))
            })
            .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, x)| x);
        match relay {
            Some(x) => {
                tree.parent[h.index()] = Some(Hop::Node(x));
                log.push(unicast(h, MessageKind::JoinReqHead, Hop::Node(x)));
                if t.dist(h, x) > r_t {
                    tree.long_links.push(h);
                }
            }
            None => {
                tree.parent[h.index()] = Some(Hop::BaseStation);
                tree.long_links.push(h);
            }
        }
    }
}

/// Transmit energy per bit over `d`.
fn hop_cost(radio: &RadioParams, d: f64) -> f64 {
    tx_energy(radio, 1, d).unwrap_or(f64::INFINITY)
}

/// Radio energy per bit along `x`'s route to the base station, if it has one.
/// The base station receives for free.
fn route_cost(t: &Topology, tree: &AggregationTree, radio: &RadioParams, x: NodeId) -> Option<f64> {
    let path = tree.path_to_bs(x)?;
    let relays = path.len().saturating_sub(2) as f64;
    let tx: f64 = path
        .windows(2)
        .map(|w| hop_cost(radio, t.hop_position(w[0]).distance(&t.hop_position(w[1]))))
        .sum();
    Some(tx + relays * radio.e_el)
}

struct MemberJoin {
    node: NodeId,
    parent: NodeId,
    backup: Option<NodeId>,
    orphan: bool,
}

fn join_members(t: &Topology, cluster_heads: &[NodeId], r_c: f64, is_head: &[bool]) -> Vec<MemberJoin> {
    if cluster_heads.is_empty() {
        return Vec::new();
    }
    t.alive_ids()
        .filter(|i| !is_head[i.index()])
        .map(|i| {
            let mut ranked: Vec<(f64, NodeId)> = cluster_heads
                .iter()
                .map(|&h| (t.dist(i, h), h))
                .filter(|&(d, _)| d <= r_c)
                .collect();
            let orphan = ranked.is_empty();
            if orphan {
                ranked = cluster_heads.iter().map(|&h| (t.dist(i, h), h)).collect();
            }
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            MemberJoin {
                node: i,
                parent: ranked[0].1,
                backup: if orphan { None } else { ranked.get(1).map(|&(_, b)| b) },
                orphan,
            }
        })
        .collect()
}

/// Join step for regular nodes: every alive non-head picks its nearest cluster
/// head within `r_c` (strongest signal) as parent and the second nearest as
/// backup, and sends it a join request. A node with no head in range joins the
/// nearest head anyway and is reported as an orphan.
///
/// Returns `(node, parent, backup)` per joining node, the orphans, and the
/// join requests.
#[allow(clippy::type_complexity)]
pub fn assign_parents(
    t: &Topology,
    cluster_heads: &[NodeId],
    r_c: f64,
    is_head: &[bool],
) -> (Vec<(NodeId, NodeId, Option<NodeId>)>, Vec<NodeId>, Vec<ControlMessage>) {
    let joins = join_members(t, cluster_heads, r_c, is_head);
    let orphans = joins.iter().filter(|j| j.orphan).map(|j| j.node).collect();
    let log = joins
        .iter()
        .map(|j| unicast(j.node, MessageKind::JoinReqMember, Hop::Node(j.parent)))
        .collect();
    let links = joins.iter().map(|j| (j.node, j.parent, j.backup)).collect();
    (links, orphans, log)
}
