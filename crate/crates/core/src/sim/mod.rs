//! Round-driven simulation: per-round formation, control and data energy
//! accounting with aggregation, delay probing, lifetime metrics and
//! multi-seed averaging.

mod delay;
mod engine;
mod metrics;
mod multi;
mod plan;

pub use delay::{flat_path, path_delay, probe_delays, two_tier_path, DelayComparison};
pub use engine::Simulation;
pub use metrics::lifetime_metrics;
pub use multi::{expand_runs, multi_run, summarize, MultiRunReport, Spread};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineParams;
use crate::control::ControlTraffic;
use crate::eema::EemaParams;
use crate::error::{Error, Result};
use crate::model::ScenarioConfig;

/// Default round cap; metrics not reached by then are reported as `None`.
pub const DEFAULT_ROUND_CAP: u32 = 5000;

/// Time model: link time proportional to distance plus a fixed processing
/// time at every relay of a hop-by-hop route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayParams {
    pub t_u_per_meter: f64,
    pub t_p: f64,
    /// Extra wait per intermediate node for aggregation, off by default.
    pub aggregation_wait: f64,
}

impl Default for DelayParams {
    fn default() -> Self {
        Self {
            t_u_per_meter: 1.0,
            t_p: 10.0,
            aggregation_wait: 0.0,
        }
    }
}

impl DelayParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_u_per_meter > 0.0 && self.t_u_per_meter.is_finite()) {
            return Err(Error::config("t_u_per_meter", "must be positive"));
        }
        if !(self.t_p > 0.0 && self.t_p.is_finite()) {
            return Err(Error::config("t_p", "must be positive"));
        }
        if !(self.aggregation_wait >= 0.0 && self.aggregation_wait.is_finite()) {
            return Err(Error::config("aggregation_wait", "must be non-negative"));
        }
        Ok(())
    }
}

/// Protocol driving the per-round formation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Eema(EemaParams),
    /// LEACH with a fixed head probability.
    Leach { p: f64 },
    Heed,
    Dwehc,
    Eedc,
    /// No clustering: greedy node-to-node forwarding without aggregation.
    Flat,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Eema(_) => "eema",
            Protocol::Leach { .. } => "leach",
            Protocol::Heed => "heed",
            Protocol::Dwehc => "dwehc",
            Protocol::Eedc => "eedc",
            Protocol::Flat => "flat",
        }
    }
}

/// Knobs of a run that are not part of the deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimOptions {
    pub baseline: BaselineParams,
    pub delay: DelayParams,
    pub round_cap: u32,
    /// End the run at the first death (enough for FND and pre-death energy).
    pub stop_at_first_death: bool,
    /// Average LEACH over the standard probability sweep in [`multi_run`].
    pub leach_sweep: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            baseline: BaselineParams::default(),
            delay: DelayParams::default(),
            round_cap: DEFAULT_ROUND_CAP,
            stop_at_first_death: false,
            leach_sweep: true,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        self.baseline.validate()?;
        self.delay.validate()?;
        if self.round_cap == 0 {
            return Err(Error::config("round_cap", "must be at least 1"));
        }
        Ok(())
    }
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u32,
    /// Alive nodes at the end of the round.
    pub alive_count: u32,
    /// Energy removed from batteries this round (J).
    pub energy_spent: f64,
    pub control_energy: f64,
    pub control_messages: ControlTraffic,
    /// Frames that reached the base station.
    pub data_packets_delivered: u64,
    /// Sensor readings carried by those frames.
    pub readings_delivered: u64,
    pub frames_lost: u64,
    /// Delay from the farthest alive node to the base station at setup.
    pub max_source_delay: f64,
    /// Orphaned members plus over-range head links.
    pub orphan_flags: u32,
    /// Head layers above the regular nodes (0 for flat forwarding).
    pub n_layers: u32,
    /// Cluster heads, super cluster heads, and heads talking to the base
    /// station directly.
    pub k_c: u32,
    pub k_s: u32,
    pub k_l: u32,
}

/// Energy bookkeeping over a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial: f64,
    pub residual: f64,
    /// Energy actually removed from batteries.
    pub deducted: f64,
    /// Requested energy that exceeded what the batteries held.
    pub shortfall: f64,
}

impl EnergyLedger {
    /// `|initial - residual - deducted| / initial` (0 for an empty budget).
    pub fn imbalance(&self) -> f64 {
        let gap = libm::fabs(self.initial - self.residual - self.deducted);
        if self.initial > 0.0 {
            gap / self.initial
        } else {
            gap
        }
    }

    pub fn conserved(&self, rel_tol: f64) -> bool {
        self.imbalance() <= rel_tol
    }
}

/// Result of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeReport {
    pub protocol: String,
    /// Hex SHA-256 of the scenario.
    pub config_digest: String,
    pub seed: u64,
    pub n_nodes: u32,
    pub per_round: Vec<RoundMetrics>,
    /// Round index of the first death, half the network dead, and the last
    /// death. `None` means beyond the simulated horizon.
    pub fnd: Option<u32>,
    pub hna: Option<u32>,
    pub lnd: Option<u32>,
    pub energy: EnergyLedger,
}

impl LifetimeReport {
    /// Mean energy per round over the rounds before the first death (all
    /// rounds if nobody died).
    pub fn mean_energy_before_first_death(&self) -> Option<f64> {
        let end = self.fnd.map_or(self.per_round.len(), |f| f as usize);
        let rounds = &self.per_round[..end.min(self.per_round.len())];
        if rounds.is_empty() {
            return None;
        }
        Some(rounds.iter().map(|r| r.energy_spent).sum::<f64>() / rounds.len() as f64)
    }
}

pub(crate) fn hex_digest(cfg: &ScenarioConfig) -> String {
    let mut s = String::with_capacity(64);
    for b in cfg.digest() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Run `protocol` on a fresh deployment from `seed` until every node is dead
/// or the round cap is hit.
pub fn run_simulation(
    cfg: &ScenarioConfig,
    protocol: Protocol,
    seed: u64,
    opts: &SimOptions,
) -> Result<LifetimeReport> {
    let mut sim = Simulation::new(cfg, protocol, opts.clone(), seed)?;
    sim.run_to_end()
}
