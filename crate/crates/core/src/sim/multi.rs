use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{hex_digest, run_simulation, LifetimeReport, Protocol, SimOptions};
use crate::baseline::LEACH_P_SWEEP;
use crate::error::{Error, Result};
use crate::model::ScenarioConfig;

/// Mean and population standard deviation of a lifetime metric over the runs
/// that reached it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
    /// Runs in which the metric was reached within the horizon.
    pub reached: u32,
    pub runs: u32,
}

impl Spread {
    pub fn of(values: &[Option<u32>]) -> Option<Self> {
        let hit: Vec<f64> = values.iter().flatten().map(|&v| f64::from(v)).collect();
        if hit.is_empty() {
            return None;
        }
        let n = hit.len() as f64;
        let mean = hit.iter().sum::<f64>() / n;
        let var = hit.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Spread {
            mean,
            std: libm::sqrt(var),
            reached: hit.len() as u32,
            runs: values.len() as u32,
        })
    }
}

/// Averages over a set of runs of one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiRunReport {
    pub protocol: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    /// Number of runs averaged (seeds times LEACH sweep points).
    pub runs: u32,
    pub fnd: Option<Spread>,
    pub hna: Option<Spread>,
    pub lnd: Option<Spread>,
    /// Per-round mean energy over the runs still going at that round.
    pub mean_energy: Vec<f64>,
    /// Per-round mean alive count; finished runs count with their final value.
    pub mean_alive: Vec<f64>,
    /// Mean over runs of the per-round energy before the first death.
    pub energy_before_first_death: Option<f64>,
    pub mean_delay: Vec<f64>,
    /// Per-round mean control messages of the cluster head and super cluster
    /// head phases, and mean frames delivered, over the runs still going.
    pub mean_messages_ch: Vec<f64>,
    pub mean_messages_sch: Vec<f64>,
    pub mean_delivered: Vec<f64>,
}

/// Combine finished reports. Order of `reports` does not matter up to
/// floating point summation order, which is fixed by sorting on seed.
pub fn summarize(protocol: &str, cfg: &ScenarioConfig, seeds: &[u64], reports: &[LifetimeReport]) -> Result<MultiRunReport> {
    if reports.is_empty() {
        return Err(Error::Domain("no runs to summarize"));
    }
    let mut sorted: Vec<&LifetimeReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.seed.cmp(&b.seed).then(a.protocol.cmp(&b.protocol)));
    let horizon = sorted.iter().map(|r| r.per_round.len()).max().unwrap_or(0);
    let mut mean_energy = Vec::with_capacity(horizon);
    let mut mean_alive = Vec::with_capacity(horizon);
    let mut mean_delay = Vec::with_capacity(horizon);
    let mut mean_messages_ch = Vec::with_capacity(horizon);
    let mut mean_messages_sch = Vec::with_capacity(horizon);
    let mut mean_delivered = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let (mut e, mut d, mut live, mut alive) = (0.0, 0.0, 0usize, 0.0);
        let (mut ch, mut sch, mut delivered) = (0.0, 0.0, 0.0);
        for r in &sorted {
            match r.per_round.get(k) {
                Some(m) => {
                    e += m.energy_spent;
                    d += m.max_source_delay;
                    ch += m.control_messages.ch_phase() as f64;
                    sch += m.control_messages.sch_phase() as f64;
                    delivered += m.data_packets_delivered as f64;
                    live += 1;
                    alive += f64::from(m.alive_count);
                }
                None => alive += r.per_round.last().map_or(0.0, |m| f64::from(m.alive_count)),
            }
        }
        mean_energy.push(e / live as f64);
        mean_delay.push(d / live as f64);
        mean_messages_ch.push(ch / live as f64);
        mean_messages_sch.push(sch / live as f64);
        mean_delivered.push(delivered / live as f64);
        mean_alive.push(alive / sorted.len() as f64);
    }
    let pre: Vec<f64> = sorted.iter().filter_map(|r| r.mean_energy_before_first_death()).collect();
    let pick = |f: fn(&LifetimeReport) -> Option<u32>| sorted.iter().map(|r| f(r)).collect::<Vec<_>>();
    Ok(MultiRunReport {
        protocol: String::from(protocol),
        config_digest: hex_digest(cfg),
        seeds: seeds.to_vec(),
        runs: sorted.len() as u32,
        fnd: Spread::of(&pick(|r| r.fnd)),
        hna: Spread::of(&pick(|r| r.hna)),
        lnd: Spread::of(&pick(|r| r.lnd)),
        mean_energy,
        mean_alive,
        energy_before_first_death: (!pre.is_empty()).then(|| pre.iter().sum::<f64>() / pre.len() as f64),
        mean_delay,
        mean_messages_ch,
        mean_messages_sch,
        mean_delivered,
    })
}

/// The individual runs [`multi_run`] performs: one per seed, times the LEACH
/// probability sweep when enabled.
pub fn expand_runs(protocol: Protocol, seeds: &[u64], opts: &SimOptions) -> Vec<(Protocol, u64)> {
    let variants: Vec<Protocol> = match protocol {
        Protocol::Leach { .. } if opts.leach_sweep => {
            LEACH_P_SWEEP.iter().map(|&p| Protocol::Leach { p }).collect()
        }
        other => Vec::from([other]),
    };
    seeds
        .iter()
        .flat_map(|&s| variants.iter().map(move |&v| (v, s)))
        .collect()
}

/// Run every seed sequentially and average. The std crate parallelizes the
/// same expansion.
pub fn multi_run(cfg: &ScenarioConfig, protocol: Protocol, seeds: &[u64], opts: &SimOptions) -> Result<MultiRunReport> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "need at least one seed"));
    }
    let reports = expand_runs(protocol, seeds, opts)
        .into_iter()
        .map(|(p, s)| run_simulation(cfg, p, s, opts))
        .collect::<Result<Vec<_>>>()?;
    summarize(protocol.name(), cfg, seeds, &reports)
}
