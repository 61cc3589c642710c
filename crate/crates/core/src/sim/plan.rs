//! Data-plane routing plan of one round and the steady-phase transmission.

use alloc::vec;
use alloc::vec::Vec;

use crate::baseline::routing::flat_next_hop;
use crate::baseline::ClusteringResult;
use crate::eema::AggregationTree;
use crate::error::Result;
use crate::model::{Hop, NodeId, Topology};
use crate::radio::{aggregate_energy, charge, rx_energy_unchecked, tx_energy_unchecked, RadioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Sends its own reading and relays whatever it receives frame by frame.
    Forward,
    /// Fuses everything it receives plus its own reading into one frame.
    AggregateAll,
    /// Fuses raw member readings plus its own; relays already aggregated
    /// frames from other heads unchanged.
    AggregateCluster,
}

/// Where every alive node sends its data in this round.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub next: Vec<Option<Hop>>,
    pub backup: Vec<Option<NodeId>>,
    pub mode: Vec<Mode>,
    /// Alive nodes, deepest first, so children act before their parents.
    pub order: Vec<NodeId>,
}

impl Plan {
    fn finish(t: &Topology, next: Vec<Option<Hop>>, backup: Vec<Option<NodeId>>, mode: Vec<Mode>) -> Self {
        let depth = depths(t, &next);
        let mut order: Vec<NodeId> = t.alive_ids().collect();
        order.sort_by(|a, b| depth[b.index()].cmp(&depth[a.index()]).then(a.cmp(b)));
        Self { next, backup, mode, order }
    }

    pub fn from_tree(t: &Topology, tree: &AggregationTree) -> Self {
        let mode = (0..t.len())
            .map(|i| {
                if tree.is_head(NodeId(i as u32)) {
                    Mode::AggregateAll
                } else {
                    Mode::Forward
                }
            })
            .collect();
        Self::finish(t, tree.parent.clone(), tree.backup.clone(), mode)
    }

    pub fn from_clusters(t: &Topology, c: &ClusteringResult) -> Self {
        let n = t.len();
        let mut next = vec![None; n];
        let mut mode = vec![Mode::Forward; n];
        for i in t.alive_ids() {
            if c.is_head(i) {
                next[i.index()] = c.inter_ch_routes[i.index()];
                mode[i.index()] = Mode::AggregateCluster;
            } else {
                next[i.index()] = c.intra_next[i.index()].map(Hop::Node);
            }
        }
        Self::finish(t, next, vec![None; n], mode)
    }

    /// Greedy node-to-node forwarding within `hop_range`, no aggregation.
    pub fn flat(t: &Topology, hop_range: f64) -> Self {
        let n = t.len();
        let index = t.alive_index(hop_range);
        let mut next = vec![None; n];
        for i in t.alive_ids() {
            next[i.index()] = Some(flat_next_hop(t, i, &index, hop_range).0);
        }
        Self::finish(t, next, vec![None; n], vec![Mode::Forward; n])
    }
}

/// Hops to the base station along `next`; nodes whose walk does not end at the
/// base station get 0.
fn depths(t: &Topology, next: &[Option<Hop>]) -> Vec<u32> {
    const UNKNOWN: u32 = u32::MAX;
    let n = t.len();
    let mut depth = vec![UNKNOWN; n];
    let mut stack = Vec::new();
    for start in 0..n {
        let mut cur = start;
        stack.clear();
        let base = loop {
            if depth[cur] != UNKNOWN {
                break depth[cur];
            }
            if stack.len() > n {
                break 0;
            }
            stack.push(cur);
            match next[cur] {
                Some(Hop::BaseStation) => break 0,
                Some(Hop::Node(p)) => cur = p.index(),
                None => break 0,
            }
        };
        for (k, &v) in stack.iter().rev().enumerate() {
            depth[v] = base + k as u32 + 1;
        }
    }
    depth
}

/// Outcome of the steady phase.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct DataTally {
    pub energy: f64,
    pub shortfall: f64,
    pub delivered: u64,
    pub readings: u64,
    pub lost: u64,
}

#[derive(Default, Clone)]
struct Inbox {
    raw: u64,
    /// Reading counts of aggregated frames.
    fused: Vec<u64>,
}

struct Ctx<'a> {
    t: &'a mut Topology,
    plan: &'a Plan,
    radio: &'a RadioParams,
    bits: u64,
    done: Vec<bool>,
    inbox: Vec<Inbox>,
    tally: DataTally,
}

#[derive(Clone, Copy)]
struct Frame {
    readings: u64,
    fused: bool,
}

impl Ctx<'_> {
    fn debit(&mut self, i: NodeId, amount: f64) -> Result<bool> {
        let c = charge(&mut self.t.nodes[i.index()], amount)?;
        self.tally.energy += c.deducted;
        self.tally.shortfall += c.shortfall;
        Ok(c.completed())
    }

    fn target(&self, from: NodeId) -> Option<Hop> {
        match self.plan.next[from.index()]? {
            Hop::Node(p) if !self.t.nodes[p.index()].alive => {
                let b = self.plan.backup[from.index()]?;
                self.t.nodes[b.index()].alive.then_some(Hop::Node(b))
            }
            hop => Some(hop),
        }
    }

    /// Send one frame from `from` toward its parent. A parent that already
    /// acted this iteration relays the frame on at once.
    fn send(&mut self, mut from: NodeId, frame: Frame) -> Result<()> {
        loop {
            let Some(to) = self.target(from) else {
                self.tally.lost += 1;
                return Ok(());
            };
            let d = self.t.hop_distance(from, to);
            if !self.debit(from, tx_energy_unchecked(self.radio, self.bits, d))? {
                self.tally.lost += 1;
                return Ok(());
            }
            let Hop::Node(p) = to else {
                self.tally.delivered += 1;
                self.tally.readings += frame.readings;
                return Ok(());
            };
            if !self.debit(p, rx_energy_unchecked(self.radio, self.bits))? {
                self.tally.lost += 1;
                return Ok(());
            }
            if !self.done[p.index()] {
                let inbox = &mut self.inbox[p.index()];
                if frame.fused {
                    inbox.fused.push(frame.readings);
                } else {
                    inbox.raw += frame.readings;
                }
                return Ok(());
            }
            from = p;
        }
    }

    fn act(&mut self, i: NodeId) -> Result<()> {
        self.done[i.index()] = true;
        let inbox = core::mem::take(&mut self.inbox[i.index()]);
        if !self.t.nodes[i.index()].alive {
            self.tally.lost += inbox.raw + inbox.fused.len() as u64;
            return Ok(());
        }
        match self.plan.mode[i.index()] {
            Mode::Forward => {
                for _ in 0..=inbox.raw {
                    self.send(i, Frame { readings: 1, fused: false })?;
                }
                for r in inbox.fused {
                    self.send(i, Frame { readings: r, fused: true })?;
                }
            }
            Mode::AggregateAll => {
                let inputs = inbox.raw + inbox.fused.len() as u64;
                let readings = 1 + inbox.raw + inbox.fused.iter().sum::<u64>();
                self.fuse_and_send(i, inputs, readings)?;
            }
            Mode::AggregateCluster => {
                self.fuse_and_send(i, inbox.raw, 1 + inbox.raw)?;
                for r in inbox.fused {
                    self.send(i, Frame { readings: r, fused: true })?;
                }
            }
        }
        Ok(())
    }

    /// A head with nothing to fuse just sends its own reading.
    fn fuse_and_send(&mut self, i: NodeId, inputs: u64, readings: u64) -> Result<()> {
        if inputs > 0 && !self.debit(i, aggregate_energy(self.radio, self.bits, inputs + 1))? {
            self.tally.lost += inputs + 1;
            return Ok(());
        }
        self.send(i, Frame { readings, fused: true })
    }
}

/// Run `frames` steady-phase iterations: every alive node senses once per
/// iteration and the plan carries the data to the base station.
pub(crate) fn transmit(
    t: &mut Topology,
    plan: &Plan,
    radio: &RadioParams,
    bits: u64,
    frames: u32,
) -> Result<DataTally> {
    let n = t.len();
    let mut ctx = Ctx {
        t,
        plan,
        radio,
        bits,
        done: vec![false; n],
        inbox: vec![Inbox::default(); n],
        tally: DataTally::default(),
    };
    for _ in 0..frames {
        ctx.done.iter_mut().for_each(|d| *d = false);
        for &i in &plan.order {
            ctx.act(i)?;
        }
    }
    Ok(ctx.tally)
}
