//! Network and station configuration shared by the solver and the simulator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::BackoffParams;
use crate::phy::{self, FrameLayout, PhyConfig, PropagationParams, RateClass};
use crate::timing::{MacTimingParams, TimedStation};

/// PER at the minimum receiver sensitivity; also the rate-switch criterion.
pub const STANDARD_PER: f64 = 8e-2;

/// Packet arrival process of a station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Arrival {
    /// Poisson arrivals, packets per second.
    Rate(f64),
    /// Always has a packet queued.
    Saturated,
}

impl Arrival {
    /// Arrival rate in packets per second; infinite when saturated.
    pub fn lambda(&self) -> f64 {
        match *self {
            Arrival::Rate(l) => l,
            Arrival::Saturated => f64::INFINITY,
        }
    }

    pub fn is_saturated(&self) -> bool {
        self.lambda().is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ChannelSpec {
    Ideal,
    /// Fixed packet error rate.
    FixedPer(f64),
    /// Distance to the access point in metres; PER follows from the link budget.
    Distance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationConfig {
    pub rate_class: RateClass,
    pub arrival: Arrival,
    pub payload_bytes: u32,
    pub channel: ChannelSpec,
}

impl StationConfig {
    pub fn new(rate_class: RateClass, arrival: Arrival, payload_bytes: u32, channel: ChannelSpec) -> Self {
        Self { rate_class, arrival, payload_bytes, channel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NetworkParams {
    pub mac: MacTimingParams,
    pub backoff: BackoffParams,
    pub propagation: PropagationParams,
    pub phy: PhyConfig,
}

impl NetworkParams {
    pub fn layout(&self, payload_bytes: u32) -> FrameLayout {
        FrameLayout {
            plcp_bits: self.mac.phy_header_bits,
            mac_header_bytes: self.mac.mac_header_bytes,
            payload_bytes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.backoff.validate()?;
        let m = &self.mac;
        let durations = [m.slot, m.sifs, m.difs, m.eifs, m.prop_delay, m.ack_timeout, m.basic_rate_bps];
        if durations.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidScenario("MAC durations and basic rate must be positive".into()));
        }
        if m.phy_header_bits == 0 || m.mac_header_bytes == 0 || m.ack_bytes == 0 {
            return Err(Error::InvalidScenario("header and ACK lengths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Scenario {
    pub stations: Vec<StationConfig>,
    pub params: NetworkParams,
}

impl Scenario {
    pub fn new(stations: Vec<StationConfig>, params: NetworkParams) -> Self {
        Self { stations, params }
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.stations.is_empty() {
            return Err(Error::InvalidScenario("at least one station is required".into()));
        }
        let mut needs_propagation = false;
        for (i, s) in self.stations.iter().enumerate() {
            match s.arrival {
                Arrival::Rate(l) if !(l >= 0.0) => {
                    return Err(Error::InvalidScenario(format!("station {i}: arrival rate {l} must be >= 0")));
                }
                _ => {}
            }
            match s.channel {
                ChannelSpec::FixedPer(p) if !(0.0..=1.0).contains(&p) => {
                    return Err(Error::InvalidScenario(format!("station {i}: PER {p} outside [0, 1]")));
                }
                ChannelSpec::Distance(d) if !(d > 0.0 && d.is_finite()) => {
                    return Err(Error::InvalidScenario(format!("station {i}: distance {d} must be positive")));
                }
                ChannelSpec::Distance(_) => needs_propagation = true,
                _ => {}
            }
        }
        if needs_propagation {
            self.params.propagation.validate()?;
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.arrival.lambda()).collect()
    }

    pub fn timed_stations(&self) -> Vec<TimedStation> {
        self.stations
            .iter()
            .map(|s| TimedStation { class: s.rate_class, payload_bytes: s.payload_bytes })
            .collect()
    }

    /// Per-station packet error rate implied by each channel spec.
    pub fn packet_error_rates(&self) -> Result<Vec<f64>> {
        self.stations
            .iter()
            .map(|s| match s.channel {
                ChannelSpec::Ideal => Ok(0.0),
                ChannelSpec::FixedPer(p) => Ok(p),
                ChannelSpec::Distance(d) => phy::per_at_distance(
                    d,
                    &self.params.propagation,
                    &self.params.phy,
                    &s.rate_class.spec(),
                    &self.params.layout(s.payload_bytes),
                ),
            })
            .collect()
    }
}

/// The three validation set-ups, with Table-style defaults.
pub mod presets {
    use super::*;

    pub const PAYLOAD_BYTES: u32 = 1028;
    /// Arrival rate used for the "saturated" background stations.
    pub const BACKGROUND_RATE: f64 = 8000.0;

    fn channel_for(per: f64) -> ChannelSpec {
        if per == 0.0 {
            ChannelSpec::Ideal
        } else {
            ChannelSpec::FixedPer(per)
        }
    }

    /// Nine 11 Mbps stations at 8000 pkt/s plus one slow station of the
    /// given class and rate. The slow station is the last one.
    pub fn scenario1(slow_class: RateClass, slow_lambda: f64, per: f64) -> Scenario {
        let ch = channel_for(per);
        let mut stations = vec![
            StationConfig::new(RateClass::R11, Arrival::Rate(BACKGROUND_RATE), PAYLOAD_BYTES, ch);
            9
        ];
        stations.push(StationConfig::new(slow_class, Arrival::Rate(slow_lambda), PAYLOAD_BYTES, ch));
        Scenario::new(stations, NetworkParams::default())
    }

    /// Eight stations, two per rate class, all at the same arrival rate.
    pub fn scenario2(lambda: f64, per: f64) -> Scenario {
        let ch = channel_for(per);
        let stations = RateClass::ALL
            .iter()
            .flat_map(|&c| [c, c])
            .map(|c| StationConfig::new(c, Arrival::Rate(lambda), PAYLOAD_BYTES, ch))
            .collect();
        Scenario::new(stations, NetworkParams::default())
    }

    /// Three saturated stations over Rayleigh fading: two 11 Mbps stations
    /// at 5 m and a third one at `distance_m` using `moving_class`.
    pub fn scenario3(distance_m: f64, moving_class: RateClass) -> Scenario {
        let near = StationConfig::new(RateClass::R11, Arrival::Saturated, PAYLOAD_BYTES, ChannelSpec::Distance(5.0));
        let moving = StationConfig::new(moving_class, Arrival::Saturated, PAYLOAD_BYTES, ChannelSpec::Distance(distance_m));
        Scenario::new(vec![near, near, moving], NetworkParams::default())
    }
}
