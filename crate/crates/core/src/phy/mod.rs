//! Physical layer: log-distance path loss, SNR per bit, bit error rate of
//! the four 802.11b DSSS/CCK modes and the resulting frame error rate.
//!
//! All BER arithmetic is done on linear SNR; decibel values only appear at
//! the boundary ([`received_snr`], [`snr_per_bit`]).

pub mod quadrature;
pub mod special;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Farthest distance probed when looking for a rate-switch point.
pub const SWITCH_SEARCH_MAX_M: f64 = 1000.0;
/// Bisection stops once the bracket is narrower than this.
pub const SWITCH_RESOLUTION_M: f64 = 0.01;

const CCK_REL_TOL: f64 = 1e-8;
// The CCK outer integrand is negligible this far past sqrt(gamma).
const CCK_UPPER_MARGIN: f64 = 10.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Dbpsk,
    Dqpsk,
    Cck55,
    Cck11,
}

impl Modulation {
    /// Bits carried per CCK codeword (the `alpha` of the CCK BER forms).
    fn cck_alpha(self) -> Option<u32> {
        match self {
            Modulation::Cck55 => Some(4),
            Modulation::Cck11 => Some(8),
            _ => None,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modulation::Dbpsk => "dbpsk",
            Modulation::Dqpsk => "dqpsk",
            Modulation::Cck55 => "cck5.5",
            Modulation::Cck11 => "cck11",
        };
        f.write_str(s)
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dbpsk" => Ok(Modulation::Dbpsk),
            "dqpsk" => Ok(Modulation::Dqpsk),
            "cck5.5" | "cck55" => Ok(Modulation::Cck55),
            "cck11" => Ok(Modulation::Cck11),
            other => Err(Error::Unsupported(format!("modulation `{other}`"))),
        }
    }
}

/// Small-scale channel model used for the BER expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    Awgn,
    #[default]
    Rayleigh,
}

impl fmt::Display for Fading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fading::Awgn => "awgn",
            Fading::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for Fading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(Fading::Awgn),
            "rayleigh" => Ok(Fading::Rayleigh),
            other => Err(Error::Unsupported(format!("channel model `{other}`"))),
        }
    }
}

/// Number of competing codewords in the AWGN CCK expression.
///
/// `Printed` raises the inner Gaussian integral to `alpha/2 - 1`;
/// `Standard` uses the M-ary orthogonal count `2^B_s - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CckExponent {
    #[default]
    Printed,
    Standard,
}

impl fmt::Display for CckExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CckExponent::Printed => "printed",
            CckExponent::Standard => "standard",
        })
    }
}

impl FromStr for CckExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "printed" => Ok(CckExponent::Printed),
            "standard" => Ok(CckExponent::Standard),
            other => Err(Error::Unsupported(format!("CCK exponent `{other}`"))),
        }
    }
}

/// The four 802.11b DSSS rate classes, ordered by bit rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum RateClass {
    R1,
    R2,
    R5_5,
    R11,
}

impl RateClass {
    pub const ALL: [RateClass; 4] = [RateClass::R1, RateClass::R2, RateClass::R5_5, RateClass::R11];

    /// Class identifier 1..=4.
    pub fn id(self) -> u8 {
        self.index() as u8 + 1
    }

    /// Zero-based position in [`RateClass::ALL`].
    pub fn index(self) -> usize {
        match self {
            RateClass::R1 => 0,
            RateClass::R2 => 1,
            RateClass::R5_5 => 2,
            RateClass::R11 => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(RateClass::R1),
            2 => Ok(RateClass::R2),
            3 => Ok(RateClass::R5_5),
            4 => Ok(RateClass::R11),
            _ => Err(Error::InvalidScenario(format!("rate class {id} not in 1..=4"))),
        }
    }

    pub fn spec(self) -> RateClassSpec {
        let (rate, modulation, chips, bits, sens) = match self {
            RateClass::R1 => (1.0e6, Modulation::Dbpsk, 11, 1, -85.0),
            RateClass::R2 => (2.0e6, Modulation::Dqpsk, 11, 2, -82.0),
            RateClass::R5_5 => (5.5e6, Modulation::Cck55, 8, 4, -80.0),
            RateClass::R11 => (11.0e6, Modulation::Cck11, 8, 8, -76.0),
        };
        RateClassSpec {
            class: self,
            data_rate_bps: rate,
            modulation,
            chips_per_symbol: chips,
            bits_per_symbol: bits,
            sensitivity_dbm: sens,
        }
    }
}

impl TryFrom<u8> for RateClass {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        RateClass::from_id(id)
    }
}

impl From<RateClass> for u8 {
    fn from(c: RateClass) -> u8 {
        c.id()
    }
}

impl fmt::Display for RateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateClassSpec {
    pub class: RateClass,
    pub data_rate_bps: f64,
    pub modulation: Modulation,
    pub chips_per_symbol: u32,
    pub bits_per_symbol: u32,
    pub sensitivity_dbm: f64,
}

/// Link-budget inputs for the log-distance path-loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationParams {
    pub tx_power_dbm: f64,
    /// One-sided noise power spectral density.
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub carrier_freq_hz: f64,
    pub path_loss_exponent: f64,
    pub ref_distance_m: f64,
    /// Linear transmit antenna gain.
    pub tx_gain: f64,
    /// Linear receive antenna gain.
    pub rx_gain: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 10.0,
            bandwidth_hz: 22.0e6,
            carrier_freq_hz: 2.4e9,
            path_loss_exponent: 4.0,
            ref_distance_m: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !(2.0..=6.0).contains(&self.path_loss_exponent) {
            return Err(Error::Domain(format!(
                "path-loss exponent {} outside [2, 6]",
                self.path_loss_exponent
            )));
        }
        if !(self.ref_distance_m > 0.0) {
            return Err(Error::Domain("reference distance must be positive".into()));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Domain("bandwidth must be positive".into()));
        }
        if !(self.carrier_freq_hz > 0.0 && self.tx_gain > 0.0 && self.rx_gain > 0.0) {
            return Err(Error::Domain("carrier frequency and antenna gains must be positive".into()));
        }
        Ok(())
    }

    /// Path loss at the reference distance, `L_0` in dB.
    pub fn reference_loss_db(&self) -> f64 {
        let wavelength = SPEED_OF_LIGHT / self.carrier_freq_hz;
        let n = self.path_loss_exponent;
        -10.0
            * (self.tx_gain * self.rx_gain * wavelength * wavelength
                / ((4.0 * PI).powi(2) * self.ref_distance_m.powf(n)))
            .log10()
    }

    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + linear_to_db(self.bandwidth_hz) + self.noise_figure_db
    }

    pub fn received_power_dbm(&self, distance_m: f64) -> Result<f64> {
        self.validate()?;
        if !(distance_m >= self.ref_distance_m) {
            return Err(Error::Domain(format!(
                "distance {distance_m} m is inside the reference distance {} m",
                self.ref_distance_m
            )));
        }
        let loss = self.reference_loss_db()
            + 10.0 * self.path_loss_exponent * (distance_m / self.ref_distance_m).log10();
        Ok(self.tx_power_dbm - loss)
    }
}

/// Received SNR in dB at `distance_m` from the access point.
pub fn received_snr(distance_m: f64, prop: &PropagationParams) -> Result<f64> {
    Ok(prop.received_power_dbm(distance_m)? - prop.noise_power_dbm())
}

/// SNR per bit in dB, adding the spreading gain `C_s / B_s`.
pub fn snr_per_bit(snr_db: f64, spec: &RateClassSpec) -> f64 {
    snr_db + linear_to_db(spec.chips_per_symbol as f64 / spec.bits_per_symbol as f64)
}

/// Distance at which the received power drops to the class sensitivity.
pub fn sensitivity_distance(spec: &RateClassSpec, prop: &PropagationParams) -> f64 {
    let margin = prop.tx_power_dbm - prop.reference_loss_db() - spec.sensitivity_dbm;
    prop.ref_distance_m * 10f64.powf(margin / (10.0 * prop.path_loss_exponent))
}

/// Bit error probability at linear SNR per bit `gamma`, with the printed
/// CCK exponent.
pub fn ber(gamma: f64, modulation: Modulation, fading: Fading) -> Result<f64> {
    ber_with(gamma, modulation, fading, CckExponent::Printed)
}

pub fn ber_with(gamma: f64, modulation: Modulation, fading: Fading, cck: CckExponent) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!("SNR per bit must be non-negative, got {gamma}")));
    }
    let p = match (fading, modulation) {
        (Fading::Awgn, Modulation::Dbpsk) => 0.5 * erfc(gamma.sqrt()),
        (Fading::Awgn, Modulation::Dqpsk) => awgn_dqpsk(gamma),
        (Fading::Awgn, m @ (Modulation::Cck55 | Modulation::Cck11)) => {
            let alpha = m.cck_alpha().expect("cck");
            let competitors = match cck {
                CckExponent::Printed => alpha / 2 - 1,
                CckExponent::Standard => (1u32 << alpha) - 1,
            };
            awgn_cck(gamma, competitors)
        }
        (Fading::Rayleigh, Modulation::Dbpsk) => 0.5 / (1.0 + gamma),
        (Fading::Rayleigh, Modulation::Dqpsk) => {
            let g = gamma * FRAC_1_SQRT_2;
            if g.is_infinite() {
                0.0
            } else {
                0.5 * (1.0 - (g / (1.0 + g)).sqrt())
            }
        }
        (Fading::Rayleigh, m @ (Modulation::Cck55 | Modulation::Cck11)) => {
            rayleigh_cck(gamma, m.cck_alpha().expect("cck"))
        }
    };
    if !p.is_finite() {
        return Err(Error::Numerical(format!("BER evaluated to {p} at gamma={gamma}")));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn awgn_dqpsk(gamma: f64) -> f64 {
    if gamma.is_infinite() {
        return 0.0;
    }
    let a = (2.0 * gamma * (1.0 - FRAC_1_SQRT_2)).sqrt();
    let b = (2.0 * gamma * (1.0 + FRAC_1_SQRT_2)).sqrt();
    let i0_term = (-0.5 * (b - a).powi(2)).exp() * special::bessel_i_scaled(0, a * b);
    special::marcum_q1(a, b) - 0.5 * i0_term
}

// 1 - ∫_{-√γ}^{∞} [erf((z+√γ)/√2)]^n φ(z) dz, with the standard normal
// density φ on both integrals. Written as Φ(-√γ) + ∫ (1 - g^n) φ so that
// small error probabilities do not cancel against 1.
fn awgn_cck(gamma: f64, competitors: u32) -> f64 {
    if gamma.is_infinite() {
        return 0.0;
    }
    let s = gamma.sqrt();
    let n = competitors as f64;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let below = 0.5 * erfc(s / SQRT_2);
    let miss = |z: f64| {
        let ln_g = (-erfc((z + s) / SQRT_2)).ln_1p();
        -(n * ln_g).exp_m1() * norm * (-0.5 * z * z).exp()
    };
    below + quadrature::integrate(miss, -s, s + CCK_UPPER_MARGIN, CCK_REL_TOL)
}

fn rayleigh_cck(gamma: f64, alpha: u32) -> f64 {
    let n = alpha - 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for i in 1..=n {
        binom *= (n - i + 1) as f64 / i as f64;
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * binom / (1.0 + i as f64 + i as f64 * gamma);
    }
    2f64.powi(alpha as i32 - 1) / (2f64.powi(alpha as i32) - 1.0) * sum
}

/// Frame geometry as seen by the error model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLayout {
    /// PLCP preamble plus PLCP header.
    pub plcp_bits: u32,
    pub mac_header_bytes: u32,
    pub payload_bytes: u32,
}

impl FrameLayout {
    pub fn psdu_bits(&self) -> u64 {
        8 * (self.mac_header_bytes as u64 + self.payload_bytes as u64)
    }

    pub fn data_bits(&self) -> u64 {
        self.psdu_bits() + self.plcp_bits as u64
    }
}

/// Frame error rate from the per-bit error probabilities of the PLCP part
/// (basic-rate modulation) and of the PSDU (data-rate modulation).
pub fn fer_from_ber(layout: &FrameLayout, pb_plcp: f64, pb_psdu: f64) -> f64 {
    let ln_ok = layout.plcp_bits as f64 * (-pb_plcp).ln_1p()
        + layout.psdu_bits() as f64 * (-pb_psdu).ln_1p();
    (-ln_ok.exp_m1()).clamp(0.0, 1.0)
}

/// PHY options that are not part of the link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhyConfig {
    pub fading: Fading,
    /// Rate class whose modulation protects the PLCP preamble and header:
    /// class 1 (DBPSK, long preamble) or class 2 (DQPSK, short preamble).
    pub basic_class: RateClass,
    pub cck_exponent: CckExponent,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            fading: Fading::Rayleigh,
            basic_class: RateClass::R1,
            cck_exponent: CckExponent::Printed,
        }
    }
}

/// Frame error rate given linear SNR per bit for the basic-rate part and
/// for the data part.
pub fn fer(
    layout: &FrameLayout,
    spec: &RateClassSpec,
    phy: &PhyConfig,
    gamma_basic: f64,
    gamma_data: f64,
) -> Result<f64> {
    let basic = phy.basic_class.spec().modulation;
    let pb_plcp = ber_with(gamma_basic, basic, phy.fading, phy.cck_exponent)?;
    let pb_psdu = ber_with(gamma_data, spec.modulation, phy.fading, phy.cck_exponent)?;
    Ok(fer_from_ber(layout, pb_plcp, pb_psdu))
}

/// Frame error rate of a station at `distance_m` using rate class `spec`.
pub fn per_at_distance(
    distance_m: f64,
    prop: &PropagationParams,
    phy: &PhyConfig,
    spec: &RateClassSpec,
    layout: &FrameLayout,
) -> Result<f64> {
    let snr = received_snr(distance_m, prop)?;
    let gamma_basic = db_to_linear(snr_per_bit(snr, &phy.basic_class.spec()));
    let gamma_data = db_to_linear(snr_per_bit(snr, spec));
    fer(layout, spec, phy, gamma_basic, gamma_data)
}

/// Largest distance (to 1 cm) at which the frame error rate of `spec`
/// stays at or below `per_threshold`, searched over
/// `[d_0, SWITCH_SEARCH_MAX_M]`.
pub fn rate_switch_distance(
    spec: &RateClassSpec,
    prop: &PropagationParams,
    phy: &PhyConfig,
    layout: &FrameLayout,
    per_threshold: f64,
) -> Result<f64> {
    let per = |d: f64| per_at_distance(d, prop, phy, spec, layout);
    let mut lo = prop.ref_distance_m;
    let mut hi = SWITCH_SEARCH_MAX_M.max(lo);
    if per(lo)? > per_threshold {
        return Err(Error::NoCrossing { threshold: per_threshold, lo, hi });
    }
    if per(hi)? <= per_threshold {
        return Ok(hi);
    }
    while hi - lo > SWITCH_RESOLUTION_M {
        let mid = 0.5 * (lo + hi);
        if per(mid)? <= per_threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_layout() -> FrameLayout {
        FrameLayout { plcp_bits: 192, mac_header_bytes: 28, payload_bytes: 1028 }
    }

    #[test]
    fn snr_at_reference_distance_is_reference_loss_only() {
        let p = PropagationParams::default();
        let snr = received_snr(1.0, &p).unwrap();
        assert_relative_eq!(snr, p.tx_power_dbm - p.reference_loss_db() - p.noise_power_dbm(), epsilon = 1e-12);
    }

    #[test]
    fn snr_at_twenty_metres() {
        // mpmath evaluation of the same link budget chain (G_t = G_r = 1)
        let snr = received_snr(20.0, &PropagationParams::default()).unwrap();
        assert!((snr - 18.482_565_309_103_2).abs() < 1e-9, "{snr}");
    }

    #[test]
    fn doubling_distance_costs_12_db_at_np4() {
        let p = PropagationParams::default();
        let a = received_snr(10.0, &p).unwrap();
        let b = received_snr(20.0, &p).unwrap();
        assert!((a - b - 40.0 * 2f64.log10()).abs() < 1e-12);
        assert!((a - b - 12.0412).abs() < 1e-4);
    }

    #[test]
    fn inside_reference_distance_is_rejected() {
        let p = PropagationParams::default();
        assert!(matches!(received_snr(0.5, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_propagation_rejected() {
        let p = PropagationParams { path_loss_exponent: 7.0, ..Default::default() };
        assert!(received_snr(10.0, &p).is_err());
    }

    #[test]
    fn spreading_gain_per_class() {
        assert!((snr_per_bit(3.0, &RateClass::R1.spec()) - 3.0 - 10.413_926_851_582_25).abs() < 1e-12);
        assert_eq!(snr_per_bit(3.0, &RateClass::R11.spec()), 3.0);
        assert!((snr_per_bit(0.0, &RateClass::R5_5.spec()) - 3.010_299_956_639_812).abs() < 1e-12);
    }

    #[test]
    fn rate_table() {
        let rates: Vec<f64> = RateClass::ALL.iter().map(|c| c.spec().data_rate_bps).collect();
        assert_eq!(rates, vec![1e6, 2e6, 5.5e6, 11e6]);
        let cb: Vec<(u32, u32)> = RateClass::ALL
            .iter()
            .map(|c| (c.spec().chips_per_symbol, c.spec().bits_per_symbol))
            .collect();
        assert_eq!(cb, vec![(11, 1), (11, 2), (8, 4), (8, 8)]);
    }

    #[test]
    fn rayleigh_dbpsk_closed_form() {
        assert_eq!(ber(0.0, Modulation::Dbpsk, Fading::Rayleigh).unwrap(), 0.5);
        assert_eq!(ber(1.0, Modulation::Dbpsk, Fading::Rayleigh).unwrap(), 0.25);
    }

    #[test]
    fn rayleigh_cck11_at_gamma_10() {
        // exact rational value of the 7-term sum, evaluated with mpmath
        let v = ber(10.0, Modulation::Cck11, Fading::Rayleigh).unwrap();
        assert!((v - 0.103_035_855_249_961_49).abs() < 1e-15);
    }

    #[test]
    fn awgn_dqpsk_at_gamma_5() {
        // mpmath quadrature of the Marcum integral minus the I_0 term
        let v = ber(5.0, Modulation::Dqpsk, Fading::Awgn).unwrap();
        assert!((v - 0.008_648_391_267_531_61).abs() < 1e-12, "{v}");
    }

    #[test]
    fn awgn_dqpsk_zero_snr_is_half() {
        assert!((ber(0.0, Modulation::Dqpsk, Fading::Awgn).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn awgn_cck_zero_snr() {
        // one competitor: P(|Z'| > Z or Z < 0) = 3/4
        let v = ber(0.0, Modulation::Cck55, Fading::Awgn).unwrap();
        assert!((v - 0.75).abs() < 1e-8);
    }

    #[test]
    fn awgn_cck_standard_exponent_is_worse() {
        for g in [0.5, 2.0, 8.0] {
            let printed = ber_with(g, Modulation::Cck11, Fading::Awgn, CckExponent::Printed).unwrap();
            let standard = ber_with(g, Modulation::Cck11, Fading::Awgn, CckExponent::Standard).unwrap();
            assert!(standard > printed);
        }
    }

    #[test]
    fn negative_snr_rejected() {
        assert!(matches!(ber(-1.0, Modulation::Dbpsk, Fading::Awgn), Err(Error::Domain(_))));
    }

    #[test]
    fn unknown_names_are_unsupported() {
        assert!(matches!("qam64".parse::<Modulation>(), Err(Error::Unsupported(_))));
        assert!(matches!("rician".parse::<Fading>(), Err(Error::Unsupported(_))));
        assert_eq!("CCK5.5".parse::<Modulation>().unwrap(), Modulation::Cck55);
    }

    #[test]
    fn fer_edge_cases() {
        let l = table_layout();
        assert_eq!(fer_from_ber(&l, 0.0, 0.0), 0.0);
        assert_eq!(fer_from_ber(&l, 0.0, 1.0), 1.0);
        assert_eq!(fer_from_ber(&l, 1.0, 0.0), 1.0);
    }

    #[test]
    fn fer_uniform_bit_errors() {
        // 1 - (1 - 1e-5)^(192 + 8*1056), mpmath at 40 digits
        let v = fer_from_ber(&table_layout(), 1e-5, 1e-5);
        assert!((v - 0.082_773_129_319_320_63).abs() < 1e-14, "{v}");
    }

    #[test]
    fn threshold_one_returns_bracket_end() {
        let d = rate_switch_distance(
            &RateClass::R11.spec(),
            &PropagationParams::default(),
            &PhyConfig::default(),
            &table_layout(),
            1.0,
        )
        .unwrap();
        assert_eq!(d, SWITCH_SEARCH_MAX_M);
    }

    #[test]
    fn unreachable_threshold_is_an_error() {
        let r = rate_switch_distance(
            &RateClass::R11.spec(),
            &PropagationParams::default(),
            &PhyConfig::default(),
            &table_layout(),
            1e-12,
        );
        assert!(matches!(r, Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn switch_point_brackets_threshold() {
        let (prop, phy, layout) = (PropagationParams::default(), PhyConfig::default(), table_layout());
        let spec = RateClass::R11.spec();
        let d = rate_switch_distance(&spec, &prop, &phy, &layout, 0.08).unwrap();
        assert!(per_at_distance(d, &prop, &phy, &spec, &layout).unwrap() <= 0.08);
        assert!(per_at_distance(d + SWITCH_RESOLUTION_M, &prop, &phy, &spec, &layout).unwrap() > 0.08);
    }

    #[test]
    fn slow_class_reaches_farther() {
        let (prop, phy, layout) = (PropagationParams::default(), PhyConfig::default(), table_layout());
        let d1 = rate_switch_distance(&RateClass::R1.spec(), &prop, &phy, &layout, 0.08).unwrap();
        let d4 = rate_switch_distance(&RateClass::R11.spec(), &prop, &phy, &layout, 0.08).unwrap();
        assert!(d1 > d4, "{d1} vs {d4}");
    }

    #[test]
    fn sensitivity_radius_for_11_mbps() {
        // received power falls to -76 dBm a little past 25 m with the defaults
        let d = sensitivity_distance(&RateClass::R11.spec(), &PropagationParams::default());
        let p = PropagationParams::default().received_power_dbm(d).unwrap();
        assert!((p + 76.0).abs() < 1e-9);
        assert!(d > 20.0 && d < 30.0);
    }
}
