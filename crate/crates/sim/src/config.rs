//! Experiment specification and its TOML form.
//!
//! ```toml
//! experiment = "lifetime"
//! protocols = ["eema", "leach", "heed"]
//! seeds = 20              # or an explicit list: [3, 7, 11]
//! scenario = "scenario1"  # or a table: [scenario] preset = "scenario2", n_nodes = 500
//!
//! [output]
//! path = "results.csv"
//!
//! [eema]
//! alpha = 1.0
//!
//! [sim]
//! round_cap = 2000
//! ```
//!
//! Every table rejects keys it does not know.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eema_core::eema::EemaParams;
use eema_core::sim::{Protocol, SimOptions};
use eema_core::{Position, RadioParams, ScenarioConfig};
use serde::de::{self, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    /// First, half and last node death per protocol.
    Lifetime,
    /// Per-round dissipated energy per protocol.
    Energy,
    /// Total spent energy against the number of layers over network sizes.
    LayerSweep,
    /// Farthest-source delay of EEMA, two-tier and flat routing over sizes.
    DelaySweep,
    /// Closed-form expectations for the scenario.
    Analyze,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lifetime => "lifetime",
            Experiment::Energy => "energy",
            Experiment::LayerSweep => "layer_sweep",
            Experiment::DelaySweep => "delay_sweep",
            Experiment::Analyze => "analyze",
        }
    }
}

/// Protocol names accepted in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Eema,
    Leach,
    Heed,
    Dwehc,
    Eedc,
    Flat,
}

impl ProtocolName {
    pub const ALL: [ProtocolName; 6] = [
        ProtocolName::Eema,
        ProtocolName::Leach,
        ProtocolName::Heed,
        ProtocolName::Dwehc,
        ProtocolName::Eedc,
        ProtocolName::Flat,
    ];

    /// The protocols compared in the lifetime and energy experiments.
    pub const COMPARED: [ProtocolName; 5] = [
        ProtocolName::Eema,
        ProtocolName::Leach,
        ProtocolName::Heed,
        ProtocolName::Dwehc,
        ProtocolName::Eedc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::Eema => "eema",
            ProtocolName::Leach => "leach",
            ProtocolName::Heed => "heed",
            ProtocolName::Dwehc => "dwehc",
            ProtocolName::Eedc => "eedc",
            ProtocolName::Flat => "flat",
        }
    }

    pub fn protocol(self, eema: &EemaParams, opts: &SimOptions) -> Protocol {
        match self {
            ProtocolName::Eema => Protocol::Eema(*eema),
            ProtocolName::Leach => Protocol::Leach { p: opts.baseline.leach_p },
            ProtocolName::Heed => Protocol::Heed,
            ProtocolName::Dwehc => Protocol::Dwehc,
            ProtocolName::Eedc => Protocol::Eedc,
            ProtocolName::Flat => Protocol::Flat,
        }
    }
}

impl FromStr for ProtocolName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| Error::Usage(format!("unknown protocol `{s}` (expected one of eema, leach, heed, dwehc, eedc, flat)")))
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parse a comma separated protocol list.
pub fn parse_protocols(list: &str) -> Result<Vec<ProtocolName>> {
    let out = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(ProtocolName::from_str)
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::Usage("empty protocol list".into()));
    }
    Ok(out)
}

/// Seeds given either as a count (`0..count`) or as an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(20)
    }
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

impl FromStr for Seeds {
    type Err = Error;

    /// `20` is a count; `3,7,11` (any string with a comma) is a list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |_| Error::Usage(format!("invalid seeds `{s}`"));
        if s.contains(',') {
            let list = s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse::<u64>().map_err(bad))
                .collect::<Result<Vec<_>>>()?;
            Ok(Seeds::List(list))
        } else {
            Ok(Seeds::Count(s.trim().parse().map_err(bad)?))
        }
    }
}

impl<'de> Deserialize<'de> for Seeds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Seeds;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a seed count or a list of seeds")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Seeds, E> {
                u64::try_from(v).map(Seeds::Count).map_err(|_| E::custom("seed count must be non-negative"))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Seeds, E> {
                Ok(Seeds::Count(v))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Seeds, A::Error> {
                let mut v = Vec::new();
                while let Some(s) = seq.next_element::<u64>()? {
                    v.push(s);
                }
                Ok(Seeds::List(v))
            }
        }
        d.deserialize_any(V)
    }
}

/// Named scenario presets.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "scenario1" => Ok(ScenarioConfig::scenario1()),
        "scenario2" => Ok(ScenarioConfig::scenario2()),
        other => Err(Error::Usage(format!("unknown scenario preset `{other}` (expected scenario1 or scenario2)"))),
    }
}

/// A preset, optionally with some fields replaced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_size_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_position: Option<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_frame_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_frame_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_per_round: Option<u32>,
}

impl ScenarioSpec {
    pub fn named(name: &str) -> Self {
        ScenarioSpec { preset: Some(name.to_owned()), ..Self::default() }
    }

    /// The preset (scenario 1 when unnamed) with the overrides applied.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut c = preset(self.preset.as_deref().unwrap_or("scenario1"))?;
        macro_rules! put {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        put!(n_nodes, field_size_m, bs_position, radio, r_c, r_s, r_t, initial_energy, data_frame_bits, control_frame_bits, frames_per_round);
        c.validate()?;
        Ok(c)
    }
}

/// Accepts `scenario = "scenario2"` as well as a table.
fn scenario_spec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ScenarioSpec, D::Error> {
    struct V;
    impl<'de> Visitor<'de> for V {
        type Value = ScenarioSpec;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a preset name or a scenario table")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ScenarioSpec, E> {
            Ok(ScenarioSpec::named(v))
        }
        fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<ScenarioSpec, A::Error> {
            ScenarioSpec::deserialize(de::value::MapAccessDeserializer::new(map))
        }
    }
    d.deserialize_any(V)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guess from the file extension; CSV unless it ends in `.json`.
    pub fn from_path(p: &Path) -> Format {
        match p.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl OutputSpec {
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| Format::from_path(&self.path))
    }
}

/// Settings of the layer and delay sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    /// Rounds whose energy is summed per layer sweep point.
    pub rounds: u32,
    /// Largest layer count tried (1 is flat forwarding).
    pub max_layers: u8,
    /// Add the paper-scale point (N=4000, M=2000) to both sweeps.
    pub full: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { rounds: 10, max_layers: 7, full: false }
    }
}

/// Everything one `sim run` needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    #[serde(default = "default_protocols")]
    pub protocols: Vec<ProtocolName>,
    #[serde(default, deserialize_with = "scenario_spec")]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub eema: EemaParams,
    #[serde(default)]
    pub sim: SimOptions,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn default_protocols() -> Vec<ProtocolName> {
    ProtocolName::COMPARED.to_vec()
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentSpec {
            experiment,
            protocols: default_protocols(),
            scenario: ScenarioSpec::default(),
            seeds: Seeds::default(),
            output: None,
            eema: EemaParams::default(),
            sim: SimOptions::default(),
            sweep: SweepSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(Error::invalid("protocols", "need at least one protocol"));
        }
        if self.seeds.resolve().is_empty() {
            return Err(Error::invalid("seeds", "need at least one seed"));
        }
        if !(self.eema.alpha > 0.0 && self.eema.alpha.is_finite()) {
            return Err(Error::invalid("eema.alpha", "must be positive"));
        }
        if self.sweep.rounds == 0 {
            return Err(Error::invalid("sweep.rounds", "must be at least 1"));
        }
        if self.sweep.max_layers < 2 {
            return Err(Error::invalid("sweep.max_layers", "must be at least 2"));
        }
        self.scenario.resolve()?;
        self.sim.validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Usage(format!("cannot encode config: {e}")))
    }
}

/// Parse and validate a config from TOML text. `origin` names the source in
/// error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Parse { origin: origin.to_owned(), line, message: e.message().to_owned() }
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use eema_core::eema::LayerPolicy;

    #[test]
    fn presets() {
        let s1 = ScenarioSpec::named("scenario1").resolve().unwrap();
        assert_eq!((s1.n_nodes, s1.field_size_m, s1.bs_position), (300, 1000.0, Position::new(500.0, 500.0)));
        let s2 = ScenarioSpec::named("scenario2").resolve().unwrap();
        assert_eq!((s2.n_nodes, s2.field_size_m, s2.bs_position), (1000, 2000.0, Position::new(1000.0, 1000.0)));
        assert_eq!(s2.radio, RadioParams::table_one());
        assert!(ScenarioSpec::named("scenario3").resolve().is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = parse_config("experiment = \"energy\"\n", "t").unwrap();
        assert_eq!(spec.protocols.len(), 5);
        assert_eq!(spec.seeds.resolve(), (0..20).collect::<Vec<_>>());
        assert_eq!(spec.scenario.resolve().unwrap(), ScenarioConfig::scenario1());
    }

    #[test]
    fn scenario_as_string_or_table() {
        let a = parse_config("experiment = \"lifetime\"\nscenario = \"scenario2\"\n", "t").unwrap();
        assert_eq!(a.scenario.resolve().unwrap().n_nodes, 1000);
        let b = parse_config(
            "experiment = \"lifetime\"\n[scenario]\npreset = \"scenario2\"\nn_nodes = 50\nbs_position = { x = 1.0, y = 2.0 }\n",
            "t",
        )
        .unwrap();
        let c = b.scenario.resolve().unwrap();
        assert_eq!((c.n_nodes, c.field_size_m, c.bs_position), (50, 2000.0, Position::new(1.0, 2.0)));
    }

    #[test]
    fn seeds_as_count_or_list() {
        let a = parse_config("experiment = \"lifetime\"\nseeds = 3\n", "t").unwrap();
        assert_eq!(a.seeds.resolve(), [0, 1, 2]);
        let b = parse_config("experiment = \"lifetime\"\nseeds = [9, 4]\n", "t").unwrap();
        assert_eq!(b.seeds.resolve(), [9, 4]);
        assert_eq!("5".parse::<Seeds>().unwrap(), Seeds::Count(5));
        assert_eq!("5,6".parse::<Seeds>().unwrap(), Seeds::List(vec![5, 6]));
        assert!("x".parse::<Seeds>().is_err());
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let text = "experiment = \"lifetime\"\n\n[sim]\nround_cap = 10\nroundcap = 3\n";
        match parse_config(text, "cfg.toml") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, Some(5));
                assert!(message.contains("roundcap"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        for bad in [
            "experiment = \"lifetime\"\ncolour = 1\n",
            "experiment = \"lifetime\"\n[scenario]\nnodes = 3\n",
            "experiment = \"lifetime\"\n[eema]\nbeta = 1.0\n",
            "experiment = \"lifetime\"\n[scenario.radio]\ne_elec = 1.0\n",
        ] {
            assert!(matches!(parse_config(bad, "t"), Err(Error::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn super_cluster_range_limit_enforced() {
        let text = "experiment = \"lifetime\"\n[scenario]\nr_s = 300.0\n";
        let err = parse_config(text, "t").unwrap_err();
        assert!(matches!(err, Error::Core(eema_core::Error::Config { field: "r_s", .. })), "{err:?}");
        assert!(parse_config("experiment = \"lifetime\"\n[scenario]\nr_s = 299.0\n", "t").is_ok());
    }

    #[test]
    fn validation_names_the_field() {
        let err = parse_config("experiment = \"lifetime\"\nprotocols = []\n", "t").unwrap_err();
        assert!(err.to_string().contains("protocols"));
        let err = parse_config("experiment = \"lifetime\"\nseeds = []\n", "t").unwrap_err();
        assert!(err.to_string().contains("seeds"));
    }

    #[test]
    fn round_trip() {
        let mut spec = ExperimentSpec::new(Experiment::LayerSweep);
        spec.protocols = vec![ProtocolName::Eema, ProtocolName::Flat];
        spec.seeds = Seeds::List(vec![1, 5]);
        spec.scenario = ScenarioSpec { preset: Some("scenario2".into()), n_nodes: Some(64), ..ScenarioSpec::default() };
        spec.output = Some(OutputSpec { path: "x.json".into(), format: Some(Format::Json) });
        spec.eema.layers = LayerPolicy::Fixed(3);
        spec.sim.round_cap = 77;
        spec.sweep.full = true;
        let text = spec.to_toml().unwrap();
        assert_eq!(parse_config(&text, "t").unwrap(), spec);
        let plain = ExperimentSpec::new(Experiment::Analyze);
        assert_eq!(parse_config(&plain.to_toml().unwrap(), "t").unwrap(), plain);
    }

    #[test]
    fn protocol_list_parsing() {
        assert_eq!(parse_protocols("eema, leach").unwrap(), [ProtocolName::Eema, ProtocolName::Leach]);
        assert!(matches!(parse_protocols("eema,spin"), Err(Error::Usage(_))));
        assert!(parse_protocols("").is_err());
    }
}
