//! TOML scenario files.
//!
//! ```toml
//! [network]
//! payload_bytes = 1028
//! cw_min = 32
//!
//! [[stations]]
//! rate_class = 4
//! lambda_pkt_s = 50.0        # or "saturated"
//! channel = "per:0.08"       # "ideal" | "per:<p>" | "distance:<m>"
//! ```
//!
//! Every section and key other than `stations` is optional; missing keys
//! take the defaults below. Unknown keys are rejected.

use std::path::Path;

use dcf_core::markov::BackoffParams;
use dcf_core::phy::{CckExponent, Fading, PhyConfig, PropagationParams, RateClass};
use dcf_core::scenario::presets;
use dcf_core::sim::{SimOptions, DEFAULT_QUEUE_CAPACITY};
use dcf_core::solver::SolverOptions;
use dcf_core::timing::MacTimingParams;
use dcf_core::{Arrival, ChannelSpec, NetworkParams, Scenario, StationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PRESETS: [&str; 3] = ["scenario1", "scenario2", "scenario3"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub propagation: PropagationParams,
    #[serde(default)]
    pub phy: PhySection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sim: SimSection,
    pub stations: Vec<StationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    /// Payload of stations that do not set their own.
    pub payload_bytes: u32,
    pub slot_s: f64,
    pub sifs_s: f64,
    pub difs_s: f64,
    pub eifs_s: f64,
    pub prop_delay_s: f64,
    pub ack_timeout_s: f64,
    pub ack_bytes: u32,
    pub phy_header_bits: u32,
    pub mac_header_bytes: u32,
    pub basic_rate_bps: f64,
    pub cw_min: u32,
    pub max_stage: u32,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self::from_params(&NetworkParams::default(), presets::PAYLOAD_BYTES)
    }
}

impl NetworkSection {
    fn from_params(p: &NetworkParams, payload_bytes: u32) -> Self {
        let m = &p.mac;
        Self {
            payload_bytes,
            slot_s: m.slot,
            sifs_s: m.sifs,
            difs_s: m.difs,
            eifs_s: m.eifs,
            prop_delay_s: m.prop_delay,
            ack_timeout_s: m.ack_timeout,
            ack_bytes: m.ack_bytes,
            phy_header_bits: m.phy_header_bits,
            mac_header_bytes: m.mac_header_bytes,
            basic_rate_bps: m.basic_rate_bps,
            cw_min: p.backoff.cw_min,
            max_stage: p.backoff.max_stage,
        }
    }

    fn mac(&self) -> MacTimingParams {
        MacTimingParams {
            slot: self.slot_s,
            sifs: self.sifs_s,
            difs: self.difs_s,
            eifs: self.eifs_s,
            prop_delay: self.prop_delay_s,
            ack_timeout: self.ack_timeout_s,
            ack_bytes: self.ack_bytes,
            phy_header_bits: self.phy_header_bits,
            mac_header_bytes: self.mac_header_bytes,
            basic_rate_bps: self.basic_rate_bps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhySection {
    /// "rayleigh" or "awgn".
    pub fading: String,
    /// Rate class carrying the PLCP preamble and header (1 or 2).
    pub basic_class: u8,
    /// "printed" or "standard".
    pub cck_exponent: String,
}

impl Default for PhySection {
    fn default() -> Self {
        Self::from_config(&PhyConfig::default())
    }
}

impl PhySection {
    fn from_config(c: &PhyConfig) -> Self {
        Self { fading: c.fading.to_string(), basic_class: c.basic_class.id(), cck_exponent: c.cck_exponent.to_string() }
    }

    fn config(&self) -> Result<PhyConfig> {
        Ok(PhyConfig {
            fading: self.fading.parse::<Fading>()?,
            basic_class: RateClass::from_id(self.basic_class)?,
            cck_exponent: self.cck_exponent.parse::<CckExponent>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { tol: o.tol, max_iters: o.max_iters, damping: o.damping }
    }
}

impl SolverSection {
    pub fn options(&self) -> Result<SolverOptions> {
        if !(self.tol > 0.0) || !(self.damping > 0.0 && self.damping <= 1.0) || self.max_iters == 0 {
            return Err(CliError::Invalid(format!(
                "solver: need tol > 0, 0 < damping <= 1, max_iters > 0 (got {}, {}, {})",
                self.tol, self.damping, self.max_iters
            )));
        }
        Ok(SolverOptions { tol: self.tol, max_iters: self.max_iters, damping: self.damping })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub duration_s: f64,
    pub seeds: Vec<u64>,
    pub queue_capacity: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { duration_s: 100.0, seeds: vec![1, 2, 3, 4, 5], queue_capacity: DEFAULT_QUEUE_CAPACITY }
    }
}

impl SimSection {
    pub fn options(&self) -> SimOptions {
        SimOptions { duration_s: self.duration_s, seed: 0, queue_capacity: self.queue_capacity }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaField {
    Rate(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationEntry {
    pub rate_class: u8,
    pub lambda_pkt_s: LambdaField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_bytes: Option<u32>,
    #[serde(default = "ideal")]
    pub channel: String,
}

fn ideal() -> String {
    "ideal".into()
}

impl StationEntry {
    fn from_config(s: &StationConfig) -> Self {
        Self {
            rate_class: s.rate_class.id(),
            lambda_pkt_s: match s.arrival {
                Arrival::Saturated => LambdaField::Keyword("saturated".into()),
                Arrival::Rate(l) => LambdaField::Rate(l),
            },
            payload_bytes: Some(s.payload_bytes),
            channel: format_channel(&s.channel),
        }
    }

    fn config(&self, idx: usize, default_payload: u32) -> Result<StationConfig> {
        let arrival = match &self.lambda_pkt_s {
            LambdaField::Rate(l) if l.is_infinite() && *l > 0.0 => Arrival::Saturated,
            LambdaField::Rate(l) => Arrival::Rate(*l),
            LambdaField::Keyword(k) if k == "saturated" => Arrival::Saturated,
            LambdaField::Keyword(k) => {
                return Err(CliError::Invalid(format!("station {idx}: lambda_pkt_s must be a number or \"saturated\", got \"{k}\"")))
            }
        };
        let rate_class =
            RateClass::from_id(self.rate_class).map_err(|_| CliError::Invalid(format!("station {idx}: rate_class must be 1..4")))?;
        let channel = parse_channel(&self.channel).map_err(|e| CliError::Invalid(format!("station {idx}: {e}")))?;
        Ok(StationConfig::new(rate_class, arrival, self.payload_bytes.unwrap_or(default_payload), channel))
    }
}

pub fn parse_channel(s: &str) -> std::result::Result<ChannelSpec, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number in channel `{s}`"));
    match s.trim().split_once(':') {
        None if s.trim() == "ideal" => Ok(ChannelSpec::Ideal),
        Some(("per", v)) => Ok(ChannelSpec::FixedPer(num(v)?)),
        Some(("distance", v)) => Ok(ChannelSpec::Distance(num(v)?)),
        _ => Err(format!("channel must be ideal, per:<p> or distance:<m>, got `{s}`")),
    }
}

pub fn format_channel(c: &ChannelSpec) -> String {
    match c {
        ChannelSpec::Ideal => "ideal".into(),
        ChannelSpec::FixedPer(p) => format!("per:{p}"),
        ChannelSpec::Distance(d) => format!("distance:{d}"),
    }
}

impl Default for ScenarioFile {
    /// Default parameters with one saturated 11 Mbps station on an ideal channel.
    fn default() -> Self {
        let station = StationConfig::new(RateClass::R11, Arrival::Saturated, presets::PAYLOAD_BYTES, ChannelSpec::Ideal);
        Self::from_scenario(&Scenario::new(vec![station], NetworkParams::default()))
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let scn = match name {
            "scenario1" => presets::scenario1(RateClass::R1, 100.0, 0.0),
            "scenario2" => presets::scenario2(50.0, 0.0),
            "scenario3" => presets::scenario3(5.0, RateClass::R11),
            other => {
                return Err(CliError::Invalid(format!("unknown preset `{other}` (known: {})", PRESETS.join(", "))))
            }
        };
        Ok(Self::from_scenario(&scn))
    }

    /// File describing `scn` with default solver and simulator sections.
    pub fn from_scenario(scn: &Scenario) -> Self {
        let payload = scn.stations.first().map_or(presets::PAYLOAD_BYTES, |s| s.payload_bytes);
        Self {
            network: NetworkSection::from_params(&scn.params, payload),
            propagation: scn.params.propagation,
            phy: PhySection::from_config(&scn.params.phy),
            solver: SolverSection::default(),
            sim: SimSection::default(),
            stations: scn.stations.iter().map(StationEntry::from_config).collect(),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let params = NetworkParams {
            mac: self.network.mac(),
            backoff: BackoffParams { cw_min: self.network.cw_min, max_stage: self.network.max_stage },
            propagation: self.propagation,
            phy: self.phy.config()?,
        };
        let stations = self
            .stations
            .iter()
            .enumerate()
            .map(|(i, s)| s.config(i, self.network.payload_bytes))
            .collect::<Result<Vec<_>>>()?;
        let scn = Scenario::new(stations, params);
        scn.validate()?;
        Ok(scn)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }
}
