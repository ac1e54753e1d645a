//! Expected slot duration of the shared channel.
//!
//! A slot is idle, a clean success of one station, a success-length slot
//! lost to channel errors, or a collision. Collisions are split by the
//! lowest rate class involved: intra-class (two or more stations of class
//! `r` and nobody else) and inter-class (class `r` plus at least one faster
//! class, no slower one). The slowest colliding frame sets the duration.

use serde::Serialize;

use crate::phy::{RateClass, RateClassSpec};

pub const NUM_CLASSES: usize = 4;

/// MAC/PHY timing constants. Durations are in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacTimingParams {
    pub slot: f64,
    pub sifs: f64,
    pub difs: f64,
    /// Kept for completeness; the model recovers from errors via the ACK timeout.
    pub eifs: f64,
    pub prop_delay: f64,
    pub ack_timeout: f64,
    pub ack_bytes: u32,
    /// PLCP preamble + header, sent at the basic rate.
    pub phy_header_bits: u32,
    pub mac_header_bytes: u32,
    pub basic_rate_bps: f64,
}

impl Default for MacTimingParams {
    fn default() -> Self {
        Self {
            slot: 20e-6,
            sifs: 10e-6,
            difs: 50e-6,
            eifs: 364e-6,
            prop_delay: 1e-6,
            ack_timeout: 364e-6,
            ack_bytes: 14,
            phy_header_bits: 192,
            mac_header_bytes: 28,
            basic_rate_bps: 1e6,
        }
    }
}

impl MacTimingParams {
    fn phy_header_time(&self) -> f64 {
        self.phy_header_bits as f64 / self.basic_rate_bps
    }

    fn data_time(&self, data_rate_bps: f64, payload_bytes: u32) -> f64 {
        8.0 * (self.mac_header_bytes as f64 + payload_bytes as f64) / data_rate_bps
    }
}

/// Channel occupancy of a successful DATA + ACK exchange.
pub fn success_duration(spec: &RateClassSpec, payload_bytes: u32, params: &MacTimingParams) -> f64 {
    params.phy_header_time()
        + params.data_time(spec.data_rate_bps, payload_bytes)
        + params.prop_delay
        + params.sifs
        + (params.phy_header_bits as f64 + 8.0 * params.ack_bytes as f64) / params.basic_rate_bps
        + params.prop_delay
        + params.difs
}

/// Channel occupancy of a collided (or corrupted) frame of this class.
pub fn collision_duration(spec: &RateClassSpec, payload_bytes: u32, params: &MacTimingParams) -> f64 {
    params.phy_header_time() + params.data_time(spec.data_rate_bps, payload_bytes) + params.ack_timeout
}

/// Probability that at least one station transmits.
pub fn busy_prob(tau: &[f64]) -> f64 {
    1.0 - tau.iter().map(|t| 1.0 - t).product::<f64>()
}

/// Probability that station `s` is the only transmitter.
pub fn success_prob(s: usize, tau: &[f64]) -> f64 {
    tau[s]
        * tau
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != s)
            .map(|(_, t)| 1.0 - t)
            .product::<f64>()
}

/// Station indices grouped by rate class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassMap {
    members: [Vec<usize>; NUM_CLASSES],
}

impl ClassMap {
    pub fn from_classes(classes: &[RateClass]) -> Self {
        let mut map = ClassMap::default();
        for (s, c) in classes.iter().enumerate() {
            map.members[c.index()].push(s);
        }
        map
    }

    pub fn members(&self, class: RateClass) -> &[usize] {
        &self.members[class.index()]
    }

    pub fn num_stations(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }
}

fn silent(idx: &[usize], tau: &[f64]) -> f64 {
    idx.iter().map(|&s| 1.0 - tau[s]).product()
}

/// Two or more class-`class` stations transmit and every other station is silent.
pub fn intra_class_collision_prob(class: RateClass, map: &ClassMap, tau: &[f64]) -> f64 {
    let own = map.members(class);
    let none = silent(own, tau);
    let exactly_one: f64 = own
        .iter()
        .map(|&s| tau[s] * own.iter().filter(|&&j| j != s).map(|&j| 1.0 - tau[j]).product::<f64>())
        .sum();
    let others: f64 = RateClass::ALL
        .iter()
        .filter(|&&c| c != class)
        .map(|&c| silent(map.members(c), tau))
        .product();
    (1.0 - (none + exactly_one)) * others
}

/// At least one class-`class` station and one faster-class station transmit,
/// all slower classes silent.
pub fn inter_class_collision_prob(class: RateClass, map: &ClassMap, tau: &[f64]) -> f64 {
    let own_active = 1.0 - silent(map.members(class), tau);
    let faster_active = 1.0
        - RateClass::ALL
            .iter()
            .filter(|&&c| c > class)
            .map(|&c| silent(map.members(c), tau))
            .product::<f64>();
    let slower_silent: f64 = RateClass::ALL
        .iter()
        .filter(|&&c| c < class)
        .map(|&c| silent(map.members(c), tau))
        .product();
    own_active * faster_active * slower_silent
}

/// What the timing model needs to know about a station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedStation {
    pub class: RateClass,
    pub payload_bytes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotBreakdown {
    pub t_idle: f64,
    pub t_success: f64,
    pub t_collision: f64,
    pub t_error: f64,
    pub t_av: f64,
    pub p_busy: f64,
    pub p_success: Vec<f64>,
    pub p_intra: [f64; NUM_CLASSES],
    pub p_inter: [f64; NUM_CLASSES],
    /// Collision duration per class, using the largest payload in the class.
    pub class_collision_duration: [f64; NUM_CLASSES],
}

impl SlotBreakdown {
    /// `P_c^{(r)} = P_c1^{(r)} + P_c2^{(r)}`.
    pub fn p_collision(&self, class: RateClass) -> f64 {
        self.p_intra[class.index()] + self.p_inter[class.index()]
    }

    /// Sum of idle, success and collision probabilities; 1 up to rounding.
    pub fn total_probability(&self) -> f64 {
        let coll: f64 = RateClass::ALL.iter().map(|&c| self.p_collision(c)).sum();
        coll + self.p_success.iter().sum::<f64>() + (1.0 - self.p_busy)
    }
}

/// Expected slot duration and its four components.
///
/// `tau` and `p_err` are indexed like `stations`.
pub fn slot_breakdown(
    stations: &[TimedStation],
    tau: &[f64],
    p_err: &[f64],
    params: &MacTimingParams,
) -> SlotBreakdown {
    assert_eq!(stations.len(), tau.len(), "tau length");
    assert_eq!(stations.len(), p_err.len(), "P_e length");
    let classes: Vec<RateClass> = stations.iter().map(|s| s.class).collect();
    let map = ClassMap::from_classes(&classes);

    let p_busy = busy_prob(tau);
    let p_success: Vec<f64> = (0..tau.len()).map(|s| success_prob(s, tau)).collect();

    let mut t_success = 0.0;
    let mut t_error = 0.0;
    for (i, st) in stations.iter().enumerate() {
        let spec = st.class.spec();
        t_success += p_success[i] * (1.0 - p_err[i]) * success_duration(&spec, st.payload_bytes, params);
        t_error += p_success[i] * p_err[i] * collision_duration(&spec, st.payload_bytes, params);
    }

    let mut p_intra = [0.0; NUM_CLASSES];
    let mut p_inter = [0.0; NUM_CLASSES];
    let mut class_collision_duration = [0.0; NUM_CLASSES];
    let mut t_collision = 0.0;
    for class in RateClass::ALL {
        let r = class.index();
        let members = map.members(class);
        if members.is_empty() {
            continue;
        }
        let payload = members.iter().map(|&s| stations[s].payload_bytes).max().unwrap_or(0);
        class_collision_duration[r] = collision_duration(&class.spec(), payload, params);
        p_intra[r] = intra_class_collision_prob(class, &map, tau);
        p_inter[r] = inter_class_collision_prob(class, &map, tau);
        t_collision += (p_intra[r] + p_inter[r]) * class_collision_duration[r];
    }

    let t_idle = (1.0 - p_busy) * params.slot;
    SlotBreakdown {
        t_idle,
        t_success,
        t_collision,
        t_error,
        t_av: t_idle + t_success + t_collision + t_error,
        p_busy,
        p_success,
        p_intra,
        p_inter,
        class_collision_duration,
    }
}
