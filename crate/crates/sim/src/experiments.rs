//! Experiment drivers. Runs fan out over rayon; results are collected in a
//! fixed order so the output only depends on the spec.

use eema_core::analysis::{AnalyticalInputs, AnalyticalReport};
use eema_core::eema::{build_hierarchy, EemaParams, LayerPolicy, StrandedPolicy};
use eema_core::sim::{expand_runs, probe_delays, run_simulation, summarize, LifetimeReport, MultiRunReport, Protocol, SimOptions};
use eema_core::{deploy, Position, ScenarioConfig};
use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentSpec, ProtocolName};
use crate::error::{Error, Result};

/// Network sizes `(N, M)` of the layer sweep at desk scale.
pub const LAYER_GRID: [(u32, f64); 3] = [(500, 300.0), (1000, 500.0), (2000, 1000.0)];
pub const DESK_DELAY_NODES: [u32; 3] = [500, 1000, 2000];
pub const DESK_DELAY_FIELDS: [f64; 2] = [500.0, 1000.0];
/// Added to both sweeps by `--full`.
pub const FULL_SCALE: (u32, f64) = (4000, 2000.0);

/// Where the delay sweep puts the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsPlacement {
    Center,
    /// At `(M + 100, M / 2)`.
    Outside,
}

impl BsPlacement {
    pub fn position(self, m: f64) -> Position {
        match self {
            BsPlacement::Center => Position::new(m / 2.0, m / 2.0),
            BsPlacement::Outside => Position::new(m + 100.0, m / 2.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BsPlacement::Center => "center",
            BsPlacement::Outside => "outside",
        }
    }
}

/// Mean total energy for one network size and layer count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub n_nodes: u32,
    pub field_size_m: f64,
    /// 1 is flat forwarding; `L >= 2` is EEMA with exactly `L` head layers.
    pub layers: u8,
    pub seed_count: u32,
    pub rounds: u32,
    /// Energy spent by all nodes over `rounds`, averaged over seeds (J).
    pub energy_j: f64,
}

/// Mean farthest-source delay of the three architectures at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint {
    pub n_nodes: u32,
    pub field_size_m: f64,
    pub bs: BsPlacement,
    pub seed_count: u32,
    pub eema_tu: f64,
    pub two_tier_tu: f64,
    pub flat_tu: f64,
}

impl DelayPoint {
    /// EEMA below two-tier below flat.
    pub fn ordered(&self) -> bool {
        self.eema_tu < self.two_tier_tu && self.two_tier_tu < self.flat_tu
    }

    /// Relative improvement of EEMA over flat forwarding.
    pub fn gain_over_flat(&self) -> f64 {
        1.0 - self.eema_tu / self.flat_tu
    }
}

/// What an experiment produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    /// Lifetime and energy experiments: one summary per protocol plus every
    /// individual run.
    Runs {
        summaries: Vec<MultiRunReport>,
        runs: Vec<LifetimeReport>,
    },
    LayerSweep(Vec<LayerPoint>),
    DelaySweep(Vec<DelayPoint>),
    Analyze(AnalyticalReport),
}

/// A finished experiment with the metadata every output file carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub experiment: Experiment,
    /// SHA-256 of the spec (without its output section).
    pub config_digest: String,
    /// SHA-256 of the resolved base scenario, as in every run report.
    pub scenario_digest: String,
    pub seeds: Vec<u64>,
    pub spec: ExperimentSpec,
    pub body: Body,
    /// Protocols whose runs failed, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of everything that determines the results.
pub fn spec_digest(spec: &ExperimentSpec) -> Result<String> {
    let mut canonical = spec.clone();
    canonical.output = None;
    Ok(hex(&Sha256::digest(canonical.to_toml()?.as_bytes())))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let cfg = spec.scenario.resolve()?;
    let seeds = spec.seeds.resolve();
    info!("{} on {} nodes, {} seeds", spec.experiment.name(), cfg.n_nodes, seeds.len());
    let mut failures = Vec::new();
    let body = match spec.experiment {
        Experiment::Lifetime | Experiment::Energy => {
            let (summaries, runs, failed) = run_protocols(spec, &cfg, &seeds);
            failures = failed;
            Body::Runs { summaries, runs }
        }
        Experiment::LayerSweep => Body::LayerSweep(layer_sweep(spec, &cfg, &seeds)?),
        Experiment::DelaySweep => Body::DelaySweep(delay_sweep(spec, &cfg, &seeds)?),
        Experiment::Analyze => Body::Analyze(analyze(&cfg, None, None)?),
    };
    Ok(RunOutput {
        experiment: spec.experiment,
        config_digest: spec_digest(spec)?,
        scenario_digest: hex(&cfg.digest()),
        seeds,
        spec: spec.clone(),
        body,
        failures,
    })
}

/// Every requested protocol over every seed. A protocol whose runs fail is
/// left out of the summaries and reported instead.
pub fn run_protocols(
    spec: &ExperimentSpec,
    cfg: &ScenarioConfig,
    seeds: &[u64],
) -> (Vec<MultiRunReport>, Vec<LifetimeReport>, Vec<String>) {
    let jobs: Vec<(ProtocolName, Protocol, u64)> = spec
        .protocols
        .iter()
        .flat_map(|&name| {
            let p = name.protocol(&spec.eema, &spec.sim);
            expand_runs(p, seeds, &spec.sim).into_iter().map(move |(v, s)| (name, v, s))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(name, p, seed)| {
            debug!("{} seed {seed}", p.name());
            (name, run_simulation(cfg, p, seed, &spec.sim))
        })
        .collect();

    let mut summaries = Vec::new();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &name in &spec.protocols {
        let mine: Vec<_> = results.iter().filter(|(n, _)| *n == name).map(|(_, r)| r).collect();
        if let Some(Err(e)) = mine.iter().find(|r| r.is_err()) {
            warn!("{name} failed: {e}");
            failures.push(format!("{name}: {e}"));
            continue;
        }
        let reports: Vec<LifetimeReport> = mine.into_iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        match summarize(name.as_str(), cfg, seeds, &reports) {
            Ok(s) => {
                summaries.push(s);
                runs.extend(reports);
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    (summaries, runs, failures)
}

fn sized(base: &ScenarioConfig, n: u32, m: f64, bs: Position) -> ScenarioConfig {
    ScenarioConfig { n_nodes: n, field_size_m: m, bs_position: bs, ..base.clone() }
}

/// Protocol for one layer count: flat forwarding for 1, otherwise EEMA with
/// exactly that many head layers and the top layer talking to the base
/// station directly.
pub fn layer_protocol(layers: u8, eema: &EemaParams) -> Protocol {
    if layers <= 1 {
        Protocol::Flat
    } else {
        Protocol::Eema(EemaParams { layers: LayerPolicy::Fixed(layers), stranded: StrandedPolicy::Direct, ..*eema })
    }
}

pub fn layer_grid(full: bool) -> Vec<(u32, f64)> {
    let mut g = LAYER_GRID.to_vec();
    if full {
        g.push(FULL_SCALE);
    }
    g
}

pub fn delay_grid(full: bool) -> Vec<(u32, f64)> {
    let mut g: Vec<(u32, f64)> = DESK_DELAY_FIELDS
        .iter()
        .flat_map(|&m| DESK_DELAY_NODES.iter().map(move |&n| (n, m)))
        .collect();
    if full {
        g.push(FULL_SCALE);
    }
    g
}

/// Total energy over `spec.sweep.rounds` rounds for every layer count and
/// network size, base station at the field center.
pub fn layer_sweep(spec: &ExperimentSpec, base: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<LayerPoint>> {
    let opts = SimOptions { round_cap: spec.sweep.rounds, ..spec.sim.clone() };
    let mut jobs = Vec::new();
    for (n, m) in layer_grid(spec.sweep.full) {
        for l in 1..=spec.sweep.max_layers {
            for &s in seeds {
                jobs.push((n, m, l, s));
            }
        }
    }
    let energies = jobs
        .par_iter()
        .map(|&(n, m, l, s)| {
            let cfg = sized(base, n, m, BsPlacement::Center.position(m));
            let r = run_simulation(&cfg, layer_protocol(l, &spec.eema), s, &opts)?;
            Ok(r.per_round.iter().map(|x| x.energy_spent).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = seeds.len();
    Ok(jobs
        .chunks(k)
        .zip(energies.chunks(k))
        .map(|(j, e)| LayerPoint {
            n_nodes: j[0].0,
            field_size_m: j[0].1,
            layers: j[0].2,
            seed_count: k as u32,
            rounds: spec.sweep.rounds,
            energy_j: e.iter().sum::<f64>() / k as f64,
        })
        .collect())
}

/// Farthest-source delay on a fresh deployment per grid point, base station
/// placement and seed; EEMA uses the spec's parameters and the two-tier route
/// uses EEMA's cluster heads.
pub fn delay_sweep(spec: &ExperimentSpec, base: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<DelayPoint>> {
    let mut jobs = Vec::new();
    for (n, m) in delay_grid(spec.sweep.full) {
        for bs in [BsPlacement::Center, BsPlacement::Outside] {
            for &s in seeds {
                jobs.push((n, m, bs, s));
            }
        }
    }
    let delays = jobs
        .par_iter()
        .map(|&(n, m, bs, s)| {
            let cfg = sized(base, n, m, bs.position(m));
            let t = deploy(&cfg, s)?;
            let (tree, _) = build_hierarchy(&t, &cfg, &spec.eema)?;
            Ok(probe_delays(&t, &tree, cfg.r_c, cfg.r_t, &spec.sim.delay)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = seeds.len();
    Ok(jobs
        .chunks(k)
        .zip(delays.chunks(k))
        .map(|(j, d)| {
            let mean = |f: fn(&eema_core::sim::DelayComparison) -> f64| d.iter().map(f).sum::<f64>() / k as f64;
            DelayPoint {
                n_nodes: j[0].0,
                field_size_m: j[0].1,
                bs: j[0].2,
                seed_count: k as u32,
                eema_tu: mean(|x| x.eema),
                two_tier_tu: mean(|x| x.two_tier),
                flat_tu: mean(|x| x.flat),
            }
        })
        .collect())
}

/// Closed-form expectations. Head transmit distances default to `r_s`.
pub fn analyze(cfg: &ScenarioConfig, d_ch: Option<f64>, d_sch: Option<f64>) -> Result<AnalyticalReport> {
    let inputs = AnalyticalInputs::from_config(cfg);
    Ok(inputs.report(d_ch.unwrap_or(cfg.r_s), d_sch.unwrap_or(cfg.r_s))?)
}

impl RunOutput {
    /// Nonzero-exit condition.
    pub fn check(&self) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Failed(format!("{} protocol(s) failed: {}", self.failures.len(), self.failures.join("; "))))
        }
    }
}
