use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;

use super::delay::{farthest_source, flat_path, path_delay, tree_delay};
use super::plan::{transmit, Plan};
use super::{hex_digest, lifetime_metrics, EnergyLedger, LifetimeReport, Protocol, RoundMetrics, SimOptions};
use crate::baseline::{dwehc_elect, eedc_elect, heed_elect, leach_elect, ClusteringResult, LeachState};
use crate::control::{ControlMessage, ControlTraffic, Delivery};
use crate::eema::build_hierarchy;
use crate::error::{Error, Result};
use crate::geometry::GridIndex;
use crate::model::{deploy_with, Hop, ScenarioConfig, Topology};
use crate::radio::{charge, rx_energy_unchecked, tx_energy_unchecked};
use crate::SimRng;

enum Formation {
    Tree(crate::eema::AggregationTree),
    Clusters(ClusteringResult),
    Flat,
}

/// One seeded run in progress. Owns its topology and generator.
pub struct Simulation {
    cfg: ScenarioConfig,
    protocol: Protocol,
    opts: SimOptions,
    seed: u64,
    topo: Topology,
    rng: SimRng,
    round: u32,
    leach: Option<LeachState>,
    ledger: EnergyLedger,
    history: Vec<RoundMetrics>,
    initial_alive: u32,
}

impl Simulation {
    /// Deploy from `seed` and prepare round 0.
    pub fn new(cfg: &ScenarioConfig, protocol: Protocol, opts: SimOptions, seed: u64) -> Result<Self> {
        let mut rng = SimRng::seed_from_u64(seed);
        let topo = deploy_with(cfg, &mut rng)?;
        Self::with_parts(cfg, protocol, opts, seed, topo, rng)
    }

    /// Run on a given topology; protocol draws come from a generator seeded
    /// with `seed`.
    pub fn on_topology(cfg: &ScenarioConfig, protocol: Protocol, opts: SimOptions, seed: u64, topo: Topology) -> Result<Self> {
        cfg.validate()?;
        Self::with_parts(cfg, protocol, opts, seed, topo, SimRng::seed_from_u64(seed))
    }

    fn with_parts(
        cfg: &ScenarioConfig,
        protocol: Protocol,
        opts: SimOptions,
        seed: u64,
        topo: Topology,
        rng: SimRng,
    ) -> Result<Self> {
        opts.validate()?;
        if let Protocol::Leach { p } = protocol {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::config("leach_p", "must lie in (0, 1)"));
            }
        }
        if let Protocol::Eema(e) = protocol {
            if !(e.alpha > 0.0 && e.alpha.is_finite()) {
                return Err(Error::config("alpha", "must be positive"));
            }
        }
        let initial = topo.total_residual();
        let topo_alive = topo.alive_count() as u32;
        let leach = match protocol {
            Protocol::Leach { p } => Some(LeachState::new(topo.len(), p)),
            _ => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            protocol,
            opts,
            seed,
            topo,
            rng,
            round: 0,
            leach,
            ledger: EnergyLedger {
                initial,
                residual: initial,
                deducted: 0.0,
                shortfall: 0.0,
            },
            history: Vec::new(),
            initial_alive: topo_alive,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn ledger(&self) -> EnergyLedger {
        self.ledger
    }

    pub fn history(&self) -> &[RoundMetrics] {
        &self.history
    }

    fn form(&mut self) -> Result<(Formation, Vec<ControlMessage>)> {
        let t = &self.topo;
        let cfg = &self.cfg;
        let b = &self.opts.baseline;
        let clusters = |c: ClusteringResult| {
            let log = c.control.clone();
            (Formation::Clusters(c), log)
        };
        Ok(match self.protocol {
            Protocol::Eema(params) => {
                let (tree, _) = build_hierarchy(t, cfg, &params)?;
                let log = tree.control.clone();
                (Formation::Tree(tree), log)
            }
            Protocol::Leach { p } => {
                let state = self.leach.as_mut().expect("leach state");
                clusters(leach_elect(t, p, self.round, state, &mut self.rng, cfg.r_t))
            }
            Protocol::Heed => clusters(heed_elect(t, b, cfg.r_c, cfg.r_t, &mut self.rng)),
            Protocol::Dwehc => clusters(dwehc_elect(t, b, &cfg.radio, cfg.data_frame_bits, cfg.r_c, cfg.r_t)),
            Protocol::Eedc => clusters(eedc_elect(t, b.eedc_d_thr, b.eedc_r_comp, cfg.r_t)),
            Protocol::Flat => (Formation::Flat, Vec::new()),
        })
    }

    /// Charge every control message: the sender transmits at the broadcast
    /// radius or the unicast distance, every alive receiver pays a reception.
    /// The base station is free. Messages from nodes that died earlier in the
    /// setup are not sent.
    fn charge_control(&mut self, log: &[ControlMessage]) -> Result<f64> {
        let bits = self.cfg.control_frame_bits;
        let radio = self.cfg.radio;
        let rx = rx_energy_unchecked(&radio, bits);
        let index: GridIndex = self.topo.alive_index(self.cfg.r_c);
        let mut spent = 0.0;
        let mut receivers = Vec::new();
        for m in log {
            if !self.topo.nodes[m.from.index()].alive {
                continue;
            }
            receivers.clear();
            let d = match m.delivery {
                Delivery::Broadcast { radius } => {
                    let p = self.topo.nodes[m.from.index()].pos;
                    let nodes = &self.topo.nodes;
                    index.for_each_candidate(&p, radius, |k| {
                        let n = &nodes[k as usize];
                        if k != m.from.0 && n.alive && n.pos.distance(&p) <= radius {
                            receivers.push(k as usize);
                        }
                    });
                    receivers.sort_unstable();
                    radius
                }
                Delivery::Unicast { to } => {
                    if let Hop::Node(j) = to {
                        receivers.push(j.index());
                    }
                    self.topo.hop_distance(m.from, to)
                }
            };
            spent += self.debit(m.from.index(), tx_energy_unchecked(&radio, bits, d))?;
            for &r in &receivers {
                spent += self.debit(r, rx)?;
            }
        }
        Ok(spent)
    }

    fn debit(&mut self, i: usize, amount: f64) -> Result<f64> {
        let c = charge(&mut self.topo.nodes[i], amount)?;
        self.ledger.deducted += c.deducted;
        self.ledger.shortfall += c.shortfall;
        Ok(c.deducted)
    }

    /// Setup (formation and control traffic) followed by the steady phase.
    pub fn run_round(&mut self) -> Result<RoundMetrics> {
        if self.topo.alive_count() == 0 {
            return Err(Error::SimulationComplete);
        }
        for n in &mut self.topo.nodes {
            n.parent = None;
            n.backup = None;
        }
        let (formation, log) = self.form()?;
        let traffic = ControlTraffic::from_log(&log);
        let dp = self.opts.delay;
        let source = farthest_source(&self.topo).ok_or(Error::EmptyNetwork)?;

        let (plan, delay, counts, flags) = match &formation {
            Formation::Tree(tree) => {
                tree.apply(&mut self.topo);
                let k_c = tree.cluster_heads().len() as u32;
                let k_s = tree.super_cluster_heads().count() as u32;
                let k_l = tree.top_heads().count() as u32;
                (
                    Plan::from_tree(&self.topo, tree),
                    tree_delay(&self.topo, tree, source, &dp)?,
                    (tree.n_layers() as u32, k_c, k_s, k_l),
                    tree.flags() as u32,
                )
            }
            Formation::Clusters(c) => {
                let hops = c
                    .path_to_bs(source)
                    .ok_or(Error::Domain("source does not reach the base station"))?;
                let path: Vec<_> = hops.iter().map(|&h| self.topo.hop_position(h)).collect();
                let k_l = c
                    .ch_set
                    .iter()
                    .filter(|h| c.inter_ch_routes[h.index()] == Some(Hop::BaseStation))
                    .count() as u32;
                (
                    Plan::from_clusters(&self.topo, c),
                    path_delay(&path, &dp, false)?,
                    (1, c.ch_set.len() as u32, 0, k_l),
                    c.long_links.len() as u32,
                )
            }
            Formation::Flat => (
                Plan::flat(&self.topo, self.cfg.r_c),
                path_delay(&flat_path(&self.topo, source, self.cfg.r_c), &dp, false)?,
                (0, 0, 0, 0),
                0,
            ),
        };

        let control_energy = self.charge_control(&log)?;
        let tally = transmit(
            &mut self.topo,
            &plan,
            &self.cfg.radio,
            self.cfg.data_frame_bits,
            self.cfg.frames_per_round,
        )?;
        self.ledger.deducted += tally.energy;
        self.ledger.shortfall += tally.shortfall;
        self.ledger.residual = self.topo.total_residual();

        let metrics = RoundMetrics {
            round: self.round,
            alive_count: self.topo.alive_count() as u32,
            energy_spent: control_energy + tally.energy,
            control_energy,
            control_messages: traffic,
            data_packets_delivered: tally.delivered,
            readings_delivered: tally.readings,
            frames_lost: tally.lost,
            max_source_delay: delay,
            orphan_flags: flags,
            n_layers: counts.0,
            k_c: counts.1,
            k_s: counts.2,
            k_l: counts.3,
        };
        self.round += 1;
        self.history.push(metrics.clone());
        Ok(metrics)
    }

    /// Run until every node is dead, the round cap is hit, or (optionally)
    /// the first death, and produce the report.
    pub fn run_to_end(&mut self) -> Result<LifetimeReport> {
        let n = self.initial_alive;
        while self.round < self.opts.round_cap {
            match self.run_round() {
                Ok(m) => {
                    if m.alive_count == 0 || (self.opts.stop_at_first_death && m.alive_count < n) {
                        break;
                    }
                }
                Err(Error::SimulationComplete) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(self.report())
    }

    /// Report over the rounds run so far.
    pub fn report(&self) -> LifetimeReport {
        let series: Vec<u32> = self.history.iter().map(|m| m.alive_count).collect();
        let (fnd, hna, lnd) = lifetime_metrics(&series, self.initial_alive);
        LifetimeReport {
            protocol: String::from(self.protocol.name()),
            config_digest: hex_digest(&self.cfg),
            seed: self.seed,
            n_nodes: self.topo.len() as u32,
            per_round: self.history.clone(),
            fnd,
            hna,
            lnd,
            energy: self.ledger,
        }
    }
}
