//! CSV and JSON writers.
//!
//! Every file starts with the config digest and the seed list. In CSV these
//! are `#` comment lines above the header, so readers that skip comments see
//! a plain table.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::Format;
use crate::error::{Error, Result};
use crate::experiments::{Body, RunOutput};

/// Columns of the per-round series.
pub const SERIES_HEADER: [&str; 9] = [
    "protocol",
    "seed_count",
    "round",
    "alive",
    "energy_j",
    "messages_ch",
    "messages_sch",
    "delivered",
    "delay_tu",
];

pub const LAYER_HEADER: [&str; 6] = ["n_nodes", "field_m", "layers", "seed_count", "rounds", "energy_j"];

pub const DELAY_HEADER: [&str; 7] = ["n_nodes", "field_m", "bs", "seed_count", "eema_tu", "two_tier_tu", "flat_tu"];

pub const ANALYSIS_HEADER: [&str; 2] = ["quantity", "value"];

/// Shortest decimal that reads back to the same value.
fn num(v: f64) -> String {
    format!("{v}")
}

fn metadata(out: &RunOutput) -> Vec<String> {
    let seeds: Vec<String> = out.seeds.iter().map(u64::to_string).collect();
    let mut lines = vec![
        format!("# eema-sim {} experiment={}", env!("CARGO_PKG_VERSION"), out.experiment.name()),
        format!("# config_digest={}", out.config_digest),
        format!("# scenario_digest={}", out.scenario_digest),
        format!("# seeds={}", seeds.join(" ")),
    ];
    if let Body::Runs { summaries, .. } = &out.body {
        for s in summaries {
            let show = |x: &Option<eema_core::sim::Spread>| {
                x.map_or("beyond_horizon".to_owned(), |v| format!("{}+-{} ({}/{})", num(v.mean), num(v.std), v.reached, v.runs))
            };
            lines.push(format!("# lifetime {} fnd={} hna={} lnd={}", s.protocol, show(&s.fnd), show(&s.hna), show(&s.lnd)));
        }
    }
    for f in &out.failures {
        lines.push(format!("# failed {f}"));
    }
    lines
}

/// The CSV text for `out`.
pub fn to_csv(out: &RunOutput) -> Result<String> {
    let mut buf = Vec::new();
    for line in metadata(out) {
        writeln!(buf, "{line}").expect("write to memory");
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let fail = |e: csv::Error| Error::Failed(format!("csv: {e}"));
        match &out.body {
            Body::Runs { summaries, .. } => {
                w.write_record(SERIES_HEADER).map_err(fail)?;
                for s in summaries {
                    let seed_count = s.seeds.len().to_string();
                    for k in 0..s.mean_energy.len() {
                        w.write_record([
                            s.protocol.clone(),
                            seed_count.clone(),
                            k.to_string(),
                            num(s.mean_alive[k]),
                            num(s.mean_energy[k]),
                            num(s.mean_messages_ch[k]),
                            num(s.mean_messages_sch[k]),
                            num(s.mean_delivered[k]),
                            num(s.mean_delay[k]),
                        ])
                        .map_err(fail)?;
                    }
                }
            }
            Body::LayerSweep(points) => {
                w.write_record(LAYER_HEADER).map_err(fail)?;
                for p in points {
                    w.write_record([
                        p.n_nodes.to_string(),
                        num(p.field_size_m),
                        p.layers.to_string(),
                        p.seed_count.to_string(),
                        p.rounds.to_string(),
                        num(p.energy_j),
                    ])
                    .map_err(fail)?;
                }
            }
            Body::DelaySweep(points) => {
                w.write_record(DELAY_HEADER).map_err(fail)?;
                for p in points {
                    w.write_record([
                        p.n_nodes.to_string(),
                        num(p.field_size_m),
                        p.bs.as_str().to_owned(),
                        p.seed_count.to_string(),
                        num(p.eema_tu),
                        num(p.two_tier_tu),
                        num(p.flat_tu),
                    ])
                    .map_err(fail)?;
                }
            }
            Body::Analyze(r) => {
                w.write_record(ANALYSIS_HEADER).map_err(fail)?;
                for (k, v) in analysis_rows(r) {
                    w.write_record([k.to_owned(), num(v)]).map_err(fail)?;
                }
            }
        }
        w.flush().map_err(|e| Error::Failed(format!("csv: {e}")))?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn analysis_rows(r: &eema_core::analysis::AnalyticalReport) -> Vec<(&'static str, f64)> {
    vec![
        ("lambda", r.lambda),
        ("n_c_real", r.n_c_real),
        ("n_c", r.n_c as f64),
        ("n_s", r.n_s),
        ("k_c", r.k_c),
        ("k_s", r.k_s),
        ("d_ch", r.d_ch),
        ("d_sch", r.d_sch),
        ("e_ch", r.e_ch),
        ("e_sch", r.e_sch),
        ("ch_to_sch_ratio", r.ch_to_sch_ratio),
        ("rs_lo", r.rs_lo),
        ("rs_hi", r.rs_hi),
    ]
}

pub fn to_json(out: &RunOutput) -> Result<String> {
    serde_json::to_string_pretty(out).map_err(|e| Error::Failed(format!("json: {e}")))
}

pub fn from_json(text: &str) -> Result<RunOutput> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        origin: "json".into(),
        line: Some(e.line()),
        message: e.to_string(),
    })
}

/// Write `out` to `path`; the file is created or replaced whole.
pub fn export(out: &RunOutput, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(out)?,
        Format::Json => to_json(out)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, ExperimentSpec};

    fn empty_runs() -> RunOutput {
        RunOutput {
            experiment: Experiment::Energy,
            config_digest: "ab".into(),
            scenario_digest: "cd".into(),
            seeds: vec![3, 4],
            spec: ExperimentSpec::new(Experiment::Energy),
            body: Body::Runs { summaries: vec![], runs: vec![] },
            failures: vec![],
        }
    }

    #[test]
    fn empty_report_is_metadata_plus_header() {
        let text = to_csv(&empty_runs()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.last(), Some(&"protocol,seed_count,round,alive,energy_j,messages_ch,messages_sch,delivered,delay_tu"));
        assert!(lines.contains(&"# config_digest=ab"));
        assert!(lines.contains(&"# seeds=3 4"));
        assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 1);
    }

    #[test]
    fn numbers_keep_full_precision() {
        assert_eq!(num(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(num(1e-9).parse::<f64>().unwrap(), 1e-9);
        assert_eq!(num(3.0), "3");
    }

    #[test]
    fn json_round_trip() {
        let out = empty_runs();
        assert_eq!(from_json(&to_json(&out).unwrap()).unwrap(), out);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let target = blocker.join("out.csv");
        let err = export(&empty_runs(), Format::Csv, &target).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
