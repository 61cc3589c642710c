use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eema_sim::config::{parse_protocols, OutputSpec};
use eema_sim::experiments::analyze;
use eema_sim::export::analysis_rows;
use eema_sim::{
    export, load_config, run_experiment, Body, Error, Experiment, ExperimentSpec, Format, Result, RunOutput,
    ScenarioSpec, Seeds, LOG_ENV,
};
use log::info;

/// Multi-layered clustering simulator for wireless sensor networks.
#[derive(Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its results.
    Run(RunArgs),
    /// Print the closed-form expectations for a scenario.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Comma separated: eema, leach, heed, dwehc, eedc, flat.
    #[arg(long)]
    protocol: Option<String>,
    /// scenario1 or scenario2.
    #[arg(long)]
    scenario: Option<String>,
    /// A count (0..n) or a comma separated list.
    #[arg(long)]
    seeds: Option<Seeds>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the extension of --out.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include the paper-scale point in the layer and delay sweeps.
    #[arg(long)]
    full: bool,
    /// Round cap per run.
    #[arg(long)]
    round_cap: Option<u32>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// Cluster head transmit distance (m); defaults to r_s.
    #[arg(long)]
    d_ch: Option<f64>,
    /// Super cluster head transmit distance (m); defaults to r_s.
    #[arg(long)]
    d_sch: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn base_spec(config: &Option<PathBuf>, experiment: Option<Experiment>) -> Result<ExperimentSpec> {
    let mut spec = match config {
        Some(p) => load_config(p)?,
        None => ExperimentSpec::new(experiment.ok_or_else(|| Error::Usage("--experiment or --config is required".into()))?),
    };
    if let Some(e) = experiment {
        spec.experiment = e;
    }
    Ok(spec)
}

fn set_output(spec: &mut ExperimentSpec, out: Option<PathBuf>, format: Option<Format>) {
    if let Some(path) = out {
        spec.output = Some(OutputSpec { path, format });
    } else if let (Some(o), Some(f)) = (spec.output.as_mut(), format) {
        o.format = Some(f);
    }
}

fn run(args: RunArgs) -> Result<RunOutput> {
    let mut spec = base_spec(&args.config, args.experiment)?;
    if let Some(list) = &args.protocol {
        spec.protocols = parse_protocols(list)?;
    }
    if let Some(name) = &args.scenario {
        spec.scenario = ScenarioSpec::named(name);
    }
    if let Some(seeds) = args.seeds {
        spec.seeds = seeds;
    }
    if args.full {
        spec.sweep.full = true;
    }
    if let Some(cap) = args.round_cap {
        spec.sim.round_cap = cap;
    }
    set_output(&mut spec, args.out, args.format);
    let out = run_experiment(&spec)?;
    print_summary(&out);
    write(&out)?;
    out.check()?;
    Ok(out)
}

fn write(out: &RunOutput) -> Result<()> {
    if let Some(o) = &out.spec.output {
        export(out, o.format(), &o.path)?;
        info!("wrote {}", o.path.display());
    }
    Ok(())
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<RunOutput> {
    let mut spec = base_spec(&args.config, Some(Experiment::Analyze))?;
    if let Some(name) = &args.scenario {
        spec.scenario = ScenarioSpec::named(name);
    }
    set_output(&mut spec, args.out, args.format);
    let mut out = run_experiment(&spec)?;
    if args.d_ch.is_some() || args.d_sch.is_some() {
        out.body = Body::Analyze(analyze(&spec.scenario.resolve()?, args.d_ch, args.d_sch)?);
    }
    print_summary(&out);
    write(&out)?;
    Ok(out)
}

fn opt(v: Option<eema_core::sim::Spread>) -> String {
    v.map_or_else(|| "-".into(), |s| format!("{:.1} ± {:.1}", s.mean, s.std))
}

fn print_summary(out: &RunOutput) {
    println!("# config_digest {}", out.config_digest);
    match &out.body {
        Body::Runs { summaries, .. } => {
            println!("{:<8} {:>16} {:>16} {:>16} {:>14}", "protocol", "fnd", "hna", "lnd", "J/round<fnd");
            for s in summaries {
                let e = s.energy_before_first_death.map_or_else(|| "-".into(), |e| format!("{e:.4}"));
                println!("{:<8} {:>16} {:>16} {:>16} {:>14}", s.protocol, opt(s.fnd), opt(s.hna), opt(s.lnd), e);
            }
        }
        Body::LayerSweep(points) => {
            println!("{:>6} {:>7} {:>6} {:>14}", "N", "M", "layers", "energy_j");
            for p in points {
                println!("{:>6} {:>7} {:>6} {:>14.4}", p.n_nodes, p.field_size_m, p.layers, p.energy_j);
            }
        }
        Body::DelaySweep(points) => {
            println!("{:>6} {:>7} {:>8} {:>10} {:>10} {:>10} {:>8}", "N", "M", "bs", "eema", "two_tier", "flat", "ordered");
            for p in points {
                println!(
                    "{:>6} {:>7} {:>8} {:>10.1} {:>10.1} {:>10.1} {:>8}",
                    p.n_nodes, p.field_size_m, p.bs.as_str(), p.eema_tu, p.two_tier_tu, p.flat_tu, p.ordered()
                );
            }
        }
        Body::Analyze(r) => {
            for (k, v) in analysis_rows(r) {
                println!("{k:<16} {v}");
            }
        }
    }
    for f in &out.failures {
        eprintln!("failed: {f}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analyze_cmd(a),
    };
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Parse { .. } | Error::Invalid { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
