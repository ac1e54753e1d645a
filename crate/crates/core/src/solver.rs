//! Coupled per-station fixed point and the throughput figures built on it.
//!
//! For every station `s` the unknowns are `tau_s`, `P_col_s`, `q_s`, and the
//! network shares one expected slot time `T_av`. They are tied together by
//!
//! ```text
//! P_col_s = 1 - prod_{j != s} (1 - tau_j)
//! P_eq_s  = P_col_s + P_e_s - P_e_s P_col_s
//! q_s     = 1 - exp(-lambda_s T_av)          (1 for saturated stations)
//! tau_s   = tau_small_queue(q_s, W_0, m, P_eq_s)
//! T_av    = slot_breakdown(tau).t_av
//! ```
//!
//! and solved by damped successive substitution over the stacked vector.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov;
use crate::phy::{self, RateClass, RateClassSpec};
use crate::scenario::{ChannelSpec, NetworkParams, Scenario, STANDARD_PER};
use crate::timing::{self, SlotBreakdown};

const MAX_DAMPING_HALVINGS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sup-norm bound on the fixed-point residual. The `T_av` component is
    /// measured relative to `T_av`.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial weight of the new iterate.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 10_000, damping: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub tau: Vec<f64>,
    pub p_col: Vec<f64>,
    pub p_eq: Vec<f64>,
    pub p_err: Vec<f64>,
    pub q: Vec<f64>,
    pub t_av: f64,
    pub breakdown: SlotBreakdown,
    pub residual: f64,
    pub iterations: usize,
}

/// `P_col_s = 1 - prod_{j != s}(1 - tau_j)` for every station.
pub fn collision_probs(tau: &[f64]) -> Vec<f64> {
    (0..tau.len())
        .map(|s| {
            1.0 - tau
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != s)
                .map(|(_, t)| 1.0 - t)
                .product::<f64>()
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Iterate {
    tau: Vec<f64>,
    p_col: Vec<f64>,
    q: Vec<f64>,
    t_av: f64,
}

impl Iterate {
    fn distance(&self, other: &Iterate) -> f64 {
        let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        sup(&self.tau, &other.tau)
            .max(sup(&self.p_col, &other.p_col))
            .max(sup(&self.q, &other.q))
            .max((self.t_av - other.t_av).abs() / other.t_av.max(self.t_av))
    }

    fn blend(&mut self, target: &Iterate, beta: f64) {
        let mix = |x: &mut f64, y: f64| *x = (1.0 - beta) * *x + beta * y;
        self.tau.iter_mut().zip(&target.tau).for_each(|(x, &y)| mix(x, y));
        self.p_col.iter_mut().zip(&target.p_col).for_each(|(x, &y)| mix(x, y));
        self.q.iter_mut().zip(&target.q).for_each(|(x, &y)| mix(x, y));
        mix(&mut self.t_av, target.t_av);
    }

    fn check(&self) -> Result<()> {
        let probs = self.tau.iter().chain(&self.p_col).chain(&self.q);
        for &p in probs {
            if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::Numerical(format!("probability left [0, 1]: {p}")));
            }
        }
        if !(self.t_av.is_finite() && self.t_av > 0.0) {
            return Err(Error::Numerical(format!("expected slot time {}", self.t_av)));
        }
        Ok(())
    }
}

struct System<'a> {
    scn: &'a Scenario,
    lambdas: Vec<f64>,
    p_err: &'a [f64],
    stations: Vec<timing::TimedStation>,
}

impl System<'_> {
    fn map(&self, x: &Iterate) -> Result<Iterate> {
        let backoff = &self.scn.params.backoff;
        let p_col = collision_probs(&x.tau);
        let q: Vec<f64> = self.lambdas.iter().map(|&l| markov::queue_nonempty_prob(l, x.t_av)).collect();
        let tau = x
            .p_col
            .iter()
            .zip(self.p_err)
            .zip(&x.q)
            .map(|((&pc, &pe), &q)| {
                let p_eq = markov::equivalent_failure_prob(pc.clamp(0.0, 1.0), pe);
                markov::tau_small_queue(q.clamp(0.0, 1.0), backoff, p_eq.clamp(0.0, 1.0))
            })
            .collect::<Result<Vec<_>>>()?;
        let t_av = timing::slot_breakdown(&self.stations, &x.tau, self.p_err, &self.scn.params.mac).t_av;
        let next = Iterate { tau, p_col, q, t_av };
        next.check()?;
        Ok(next)
    }
}

/// Solves the operating point, deriving each station's PER from its channel spec.
pub fn solve_operating_point(scn: &Scenario, opts: &SolverOptions) -> Result<OperatingPoint> {
    scn.validate()?;
    let p_err = scn.packet_error_rates()?;
    solve_with_errors(scn, &p_err, opts)
}

/// Solves the operating point for externally supplied per-station PERs.
pub fn solve_with_errors(scn: &Scenario, p_err: &[f64], opts: &SolverOptions) -> Result<OperatingPoint> {
    if p_err.len() != scn.len() {
        return Err(Error::InvalidScenario(format!("{} PER values for {} stations", p_err.len(), scn.len())));
    }
    let sys = System { scn, lambdas: scn.lambdas(), p_err, stations: scn.timed_stations() };
    let params = &scn.params;

    // start from the ideal saturated point
    let tau0 = 2.0 / (params.backoff.cw_min as f64 + 1.0);
    let tau = vec![tau0; scn.len()];
    let p_col = collision_probs(&tau);
    let t_av = params.mac.slot;
    let q = sys.lambdas.iter().map(|&l| markov::queue_nonempty_prob(l, t_av)).collect();
    let mut x = Iterate { tau, p_col, q, t_av };

    let mut beta = opts.damping;
    let mut halvings = 0;
    let mut prev_residual = f64::INFINITY;
    for iteration in 0..opts.max_iters {
        let fx = sys.map(&x)?;
        let residual = fx.distance(&x);
        if residual <= opts.tol {
            return Ok(finish(scn, p_err, x, residual, iteration));
        }
        if residual > prev_residual && halvings < MAX_DAMPING_HALVINGS {
            beta *= 0.5;
            halvings += 1;
        }
        prev_residual = residual;
        x.blend(&fx, beta);
    }
    let residual = sys.map(&x)?.distance(&x);
    Err(Error::Divergence { iterations: opts.max_iters, residual })
}

fn finish(scn: &Scenario, p_err: &[f64], x: Iterate, residual: f64, iterations: usize) -> OperatingPoint {
    let p_eq = x
        .p_col
        .iter()
        .zip(p_err)
        .map(|(&pc, &pe)| markov::equivalent_failure_prob(pc, pe))
        .collect();
    let breakdown = timing::slot_breakdown(&scn.timed_stations(), &x.tau, p_err, &scn.params.mac);
    OperatingPoint {
        tau: x.tau,
        p_col: x.p_col,
        p_eq,
        p_err: p_err.to_vec(),
        q: x.q,
        t_av: x.t_av,
        breakdown,
        residual,
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    /// Bits per second of delivered payload.
    pub aggregate_bps: f64,
    pub per_station_bps: Vec<f64>,
    /// Low-load prediction `sum_s 8 PL_s lambda_s`.
    pub linear_bps: f64,
    pub critical_rates: Vec<f64>,
    pub in_region_d: bool,
}

/// Payload throughput at a solved operating point.
pub fn aggregate_throughput(op: &OperatingPoint, scn: &Scenario) -> ThroughputReport {
    let per_station_bps: Vec<f64> = scn
        .stations
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let p_s = timing::success_prob(s, &op.tau);
            p_s * (1.0 - op.p_err[s]) * 8.0 * st.payload_bytes as f64 / op.t_av
        })
        .collect();
    let critical_rates: Vec<f64> = scn
        .stations
        .iter()
        .map(|st| critical_rate(&st.rate_class.spec(), &scn.params, st.payload_bytes))
        .collect();
    ThroughputReport {
        aggregate_bps: per_station_bps.iter().sum(),
        per_station_bps,
        linear_bps: linear_model(scn),
        in_region_d: in_region_d(&scn.lambdas(), &critical_rates),
        critical_rates,
    }
}

/// Low-load throughput: each station delivers what it is offered.
pub fn linear_model(scn: &Scenario) -> f64 {
    scn.stations
        .iter()
        .map(|s| 8.0 * s.payload_bytes as f64 * s.arrival.lambda())
        .sum()
}

/// Packet rate `1 / (T_A + T_s)` at which a station stops keeping up,
/// with access time `T_A = (W_0 / 2) sigma`.
pub fn critical_rate(spec: &RateClassSpec, params: &NetworkParams, payload_bytes: u32) -> f64 {
    let access = params.backoff.cw_min as f64 / 2.0 * params.mac.slot;
    1.0 / (access + timing::success_duration(spec, payload_bytes, &params.mac))
}

/// Membership in the linear-validity region: every station but the last
/// below half its critical rate (open), and `sum_s lambda_s / lambda_c_s <= 1/2`.
pub fn in_region_d(lambda: &[f64], lambda_c: &[f64]) -> bool {
    assert_eq!(lambda.len(), lambda_c.len());
    let n = lambda.len();
    if lambda.iter().any(|&l| !(l >= 0.0) || l.is_infinite()) {
        return false;
    }
    let axes_ok = lambda[..n.saturating_sub(1)]
        .iter()
        .zip(lambda_c)
        .all(|(&l, &lc)| l < lc / 2.0);
    let load: f64 = lambda.iter().zip(lambda_c).map(|(l, lc)| l / lc).sum();
    axes_ok && load <= 0.5
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Arrival rate of one station.
    Lambda(usize),
    /// Common arrival rate of every station.
    LambdaAll,
    /// Distance of one station to the AP; its rate class follows the
    /// PER-threshold switching radii.
    Distance(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub classes: Vec<RateClass>,
    pub op: OperatingPoint,
    pub report: ThroughputReport,
}

/// Rate-switch radius of every class (`None` if a class never meets the
/// PER threshold), for the given scenario's link budget.
pub fn switch_radii(params: &NetworkParams, payload_bytes: u32, per_threshold: f64) -> Result<[Option<f64>; 4]> {
    let mut radii = [None; 4];
    for class in RateClass::ALL {
        radii[class.index()] = match phy::rate_switch_distance(
            &class.spec(),
            &params.propagation,
            &params.phy,
            &params.layout(payload_bytes),
            per_threshold,
        ) {
            Ok(d) => Some(d),
            Err(Error::NoCrossing { .. }) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(radii)
}

/// Fastest class whose switch radius covers `distance_m`; class 1 beyond all radii.
pub fn adapted_class(distance_m: f64, radii: &[Option<f64>; 4]) -> RateClass {
    RateClass::ALL
        .iter()
        .rev()
        .copied()
        .find(|c| radii[c.index()].is_some_and(|r| distance_m <= r))
        .unwrap_or(RateClass::R1)
}

/// Evaluates the model independently at every grid value. Output order
/// follows `grid`.
pub fn sweep(scn: &Scenario, axis: SweepAxis, grid: &[f64], opts: &SolverOptions) -> Result<Vec<SweepPoint>> {
    let station = match axis {
        SweepAxis::Lambda(i) | SweepAxis::Distance(i) => Some(i),
        SweepAxis::LambdaAll => None,
    };
    if let Some(i) = station {
        if i >= scn.len() {
            return Err(Error::InvalidScenario(format!("sweep station {i} out of range (N = {})", scn.len())));
        }
    }
    let radii = match axis {
        SweepAxis::Distance(i) => Some(switch_radii(&scn.params, scn.stations[i].payload_bytes, STANDARD_PER)?),
        _ => None,
    };
    grid.par_iter()
        .map(|&x| {
            let mut point = scn.clone();
            match axis {
                SweepAxis::Lambda(i) => point.stations[i].arrival = crate::Arrival::Rate(x),
                SweepAxis::LambdaAll => {
                    point.stations.iter_mut().for_each(|s| s.arrival = crate::Arrival::Rate(x));
                }
                SweepAxis::Distance(i) => {
                    let st = &mut point.stations[i];
                    st.channel = ChannelSpec::Distance(x);
                    st.rate_class = adapted_class(x, radii.as_ref().expect("radii"));
                }
            }
            let op = solve_operating_point(&point, opts)?;
            let report = aggregate_throughput(&op, &point);
            Ok(SweepPoint { x, classes: point.stations.iter().map(|s| s.rate_class).collect(), op, report })
        })
        .collect()
}
