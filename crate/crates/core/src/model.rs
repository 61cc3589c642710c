//! Nodes, scenarios and the deployed topology.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridIndex, Position};
use crate::radio::RadioParams;
use crate::SimRng;

/// Dense node identifier in `[0, n_nodes)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Next hop of a frame: another sensor or the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hop {
    Node(NodeId),
    BaseStation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Regular,
    ClusterHead,
    SuperClusterHead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub pos: Position,
    pub e_res: f64,
    pub e_max: f64,
    pub role: Role,
    /// 1 for regular nodes, 2 for cluster heads, 3+ for super cluster heads.
    pub layer: u8,
    pub parent: Option<Hop>,
    pub backup: Option<NodeId>,
    pub alive: bool,
}

impl NodeState {
    pub fn new(id: NodeId, pos: Position, energy: f64) -> Self {
        Self {
            id,
            pos,
            e_res: energy,
            e_max: energy,
            role: Role::Regular,
            layer: 1,
            parent: None,
            backup: None,
            alive: energy > 0.0,
        }
    }

    /// Residual energy as a fraction of the initial budget.
    #[inline]
    pub fn energy_fraction(&self) -> f64 {
        if self.e_max > 0.0 {
            self.e_res / self.e_max
        } else {
            0.0
        }
    }

    pub(crate) fn reset_role(&mut self) {
        self.role = Role::Regular;
        self.layer = 1;
        self.parent = None;
        self.backup = None;
    }
}

/// Deployment and radio parameters of one simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_nodes: u32,
    /// Side of the square field (m).
    pub field_size_m: f64,
    pub bs_position: Position,
    pub radio: RadioParams,
    /// Cluster range (m).
    pub r_c: f64,
    /// Third-layer super cluster range (m); upper layers grow from `r_c`.
    pub r_s: f64,
    /// Maximum transmission range (m).
    pub r_t: f64,
    /// Initial battery per node (J).
    pub initial_energy: f64,
    pub data_frame_bits: u64,
    pub control_frame_bits: u64,
    pub frames_per_round: u32,
    pub seed: u64,
}

impl ScenarioConfig {
    /// 300 nodes on a 1000 m field with the base station at the center.
    pub fn scenario1() -> Self {
        Self {
            n_nodes: 300,
            field_size_m: 1000.0,
            bs_position: Position::new(500.0, 500.0),
            radio: RadioParams::table_one(),
            r_c: 50.0,
            r_s: 100.0,
            r_t: 300.0,
            initial_energy: 8.0,
            data_frame_bits: 500 * 8,
            control_frame_bits: 200,
            frames_per_round: 10,
            seed: 0,
        }
    }

    /// 1000 nodes on a 2000 m field with the base station at the center.
    pub fn scenario2() -> Self {
        Self {
            n_nodes: 1000,
            field_size_m: 2000.0,
            bs_position: Position::new(1000.0, 1000.0),
            ..Self::scenario1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::config("n_nodes", "must be at least 1"));
        }
        if !(self.field_size_m.is_finite() && self.field_size_m > 0.0) {
            return Err(Error::config("field_size_m", "must be positive"));
        }
        if !(self.bs_position.x.is_finite() && self.bs_position.y.is_finite()) {
            return Err(Error::config("bs_position", "must be finite"));
        }
        self.radio.validate()?;
        if !(self.r_c.is_finite() && self.r_c > 0.0) {
            return Err(Error::config("r_c", "must be positive"));
        }
        if !(self.r_t.is_finite() && self.r_t > self.r_c) {
            return Err(Error::config("r_t", "must exceed r_c"));
        }
        if !(self.r_s >= self.r_c && self.r_s < 6.0 * self.r_c) {
            return Err(Error::config(
                "r_s",
                "must satisfy r_c <= r_s < 6 r_c (connectivity limit on the super cluster range)",
            ));
        }
        if !(self.initial_energy.is_finite() && self.initial_energy >= 0.0) {
            return Err(Error::config("initial_energy", "must be non-negative"));
        }
        if self.data_frame_bits == 0 {
            return Err(Error::config("data_frame_bits", "must be positive"));
        }
        if self.control_frame_bits == 0 {
            return Err(Error::config("control_frame_bits", "must be positive"));
        }
        Ok(())
    }

    /// SHA-256 over a canonical little-endian encoding of every field.
    pub fn digest(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.n_nodes.to_le_bytes());
        for v in [
            self.field_size_m,
            self.bs_position.x,
            self.bs_position.y,
            self.radio.e_el,
            self.radio.eps_fs,
            self.radio.eps_mp,
            self.radio.d0,
            self.radio.e_da,
            self.r_c,
            self.r_s,
            self.r_t,
            self.initial_energy,
        ] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(self.data_frame_bits.to_le_bytes());
        h.update(self.control_frame_bits.to_le_bytes());
        h.update(self.frames_per_round.to_le_bytes());
        h.update(self.seed.to_le_bytes());
        h.finalize().into()
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::scenario1()
    }
}

/// The deployed network: sensors plus the base station location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<NodeState>,
    pub bs: Position,
    pub m: f64,
}

/// Deploy `config.n_nodes` sensors uniformly at random with a fresh generator.
pub fn deploy(config: &ScenarioConfig, seed: u64) -> Result<Topology> {
    let mut rng = SimRng::seed_from_u64(seed);
    deploy_with(config, &mut rng)
}

/// Deploy drawing positions from `rng`: x then y for node 0, 1, ...
pub fn deploy_with<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Topology> {
    config.validate()?;
    let m = config.field_size_m;
    let nodes = (0..config.n_nodes)
        .map(|i| {
            let x = rng.gen::<f64>() * m;
            let y = rng.gen::<f64>() * m;
            NodeState::new(NodeId(i), Position::new(x, y), config.initial_energy)
        })
        .collect();
    Ok(Topology {
        nodes,
        bs: config.bs_position,
        m,
    })
}

impl Topology {
    /// Build a topology from explicit positions, all with the same battery.
    pub fn from_positions(positions: &[Position], bs: Position, m: f64, energy: f64) -> Self {
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(i, p)| NodeState::new(NodeId(i as u32), *p, energy))
            .collect();
        Self { nodes, bs, m }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeState> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    #[inline]
    pub fn pos(&self, id: NodeId) -> Position {
        self.nodes[id.index()].pos
    }

    #[inline]
    pub fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.pos(a).distance(&self.pos(b))
    }

    /// Distance from a node to the base station.
    #[inline]
    pub fn dist_bs(&self, a: NodeId) -> f64 {
        self.pos(a).distance(&self.bs)
    }

    /// Distance from a node to the next hop's position.
    pub fn hop_distance(&self, from: NodeId, to: Hop) -> f64 {
        match to {
            Hop::Node(j) => self.dist(from, j),
            Hop::BaseStation => self.dist_bs(from),
        }
    }

    pub fn hop_position(&self, to: Hop) -> Position {
        match to {
            Hop::Node(j) => self.pos(j),
            Hop::BaseStation => self.bs,
        }
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.alive).map(|n| n.id)
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn total_residual(&self) -> f64 {
        self.nodes.iter().map(|n| n.e_res).sum()
    }

    /// Alive nodes other than `i` within `r` of it, in id order.
    pub fn neighbors_within(&self, i: NodeId, r: f64) -> Result<Vec<NodeId>> {
        let me = self.node(i)?;
        if !me.alive {
            return Err(Error::DeadNode(i));
        }
        Ok(self
            .nodes
            .iter()
            .filter(|n| n.alive && n.id != i && n.pos.distance(&me.pos) <= r)
            .map(|n| n.id)
            .collect())
    }

    /// Largest distance from an alive node to the base station.
    pub fn farthest_distance_to_bs(&self) -> Result<f64> {
        self.nodes
            .iter()
            .filter(|n| n.alive)
            .map(|n| n.pos.distance(&self.bs))
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
            .ok_or(Error::EmptyNetwork)
    }

    /// Grid index over the alive nodes.
    pub fn alive_index(&self, cell: f64) -> GridIndex {
        GridIndex::new(self.nodes.iter().filter(|n| n.alive).map(|n| (n.id.0, n.pos)), cell)
    }

    /// Neighbor lists of radius `r` for every node (empty for dead nodes).
    pub fn neighbor_table(&self, r: f64) -> NeighborTable {
        let grid = self.alive_index(r);
        let lists = self
            .nodes
            .iter()
            .map(|n| {
                let mut out = Vec::new();
                if n.alive {
                    grid.for_each_candidate(&n.pos, r, |k| {
                        let j = NodeId(k);
                        if j != n.id && self.pos(j).distance(&n.pos) <= r {
                            out.push(j);
                        }
                    });
                    out.sort_unstable();
                }
                out
            })
            .collect();
        NeighborTable { radius: r, lists }
    }
}

/// Precomputed alive-neighbor lists for one radius.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    pub radius: f64,
    lists: Vec<Vec<NodeId>>,
}

impl NeighborTable {
    pub fn of(&self, i: NodeId) -> &[NodeId] {
        &self.lists[i.index()]
    }
}
