//! Solver, timing and chain checked against independent reference
//! computations that share no code with the library.

use dcf_core::markov::{self, BackoffParams, StationChainState};
use dcf_core::phy::RateClass;
use dcf_core::solver::{aggregate_throughput, collision_probs, solve_operating_point, SolverOptions};
use dcf_core::timing::{self, MacTimingParams, TimedStation};
use dcf_core::{Arrival, ChannelSpec, NetworkParams, Scenario, StationConfig};
use proptest::prelude::*;

/// Saturated symmetric network: root of
/// `tau = 2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^m))`, `p = 1-(1-tau)^(n-1)`.
fn bianchi_tau(n: usize, w: f64, m: i32) -> f64 {
    let g = |tau: f64| {
        let p = 1.0 - (1.0 - tau).powi(n as i32 - 1);
        let rhs = 2.0 * (1.0 - 2.0 * p) / ((1.0 - 2.0 * p) * (w + 1.0) + p * w * (1.0 - (2.0 * p).powi(m)));
        tau - rhs
    };
    let (mut lo, mut hi) = (1e-9, 2.0 / (w + 1.0));
    assert!(g(lo) < 0.0 && g(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn uniform(n: usize, class: RateClass, arrival: Arrival, channel: ChannelSpec) -> Scenario {
    Scenario::new(vec![StationConfig::new(class, arrival, 1028, channel); n], NetworkParams::default())
}

#[test]
fn symmetric_saturated_matches_scalar_bisection() {
    for n in [2, 5, 10, 20] {
        let scn = uniform(n, RateClass::R11, Arrival::Saturated, ChannelSpec::Ideal);
        let op = solve_operating_point(&scn, &SolverOptions::default()).unwrap();
        let oracle = bianchi_tau(n, 32.0, 5);
        for &t in &op.tau {
            assert!((t - oracle).abs() < 1e-9, "N={n}: {t} vs {oracle}");
        }
    }
}

#[test]
fn symmetric_saturated_other_backoff() {
    let mut params = NetworkParams::default();
    params.backoff = BackoffParams { cw_min: 16, max_stage: 6 };
    let scn = Scenario::new(
        vec![StationConfig::new(RateClass::R2, Arrival::Saturated, 500, ChannelSpec::Ideal); 7],
        params,
    );
    let op = solve_operating_point(&scn, &SolverOptions::default()).unwrap();
    assert!((op.tau[0] - bianchi_tau(7, 16.0, 6)).abs() < 1e-9);
}

// Exhaustive sum over all 2^N transmitter subsets. A collision is charged to
// the slowest class that takes part in it.
struct Enumerated {
    idle: f64,
    success: Vec<f64>,
    collision: [f64; 4],
    t_av: f64,
}

fn enumerate(stations: &[TimedStation], tau: &[f64], p_err: &[f64], mac: &MacTimingParams) -> Enumerated {
    let n = tau.len();
    let mut out = Enumerated { idle: 0.0, success: vec![0.0; n], collision: [0.0; 4], t_av: 0.0 };
    let class_tc = |c: RateClass| {
        let pl = stations.iter().filter(|s| s.class == c).map(|s| s.payload_bytes).max().unwrap();
        timing::collision_duration(&c.spec(), pl, mac)
    };
    for mask in 0u32..(1 << n) {
        let p: f64 = (0..n).map(|s| if mask >> s & 1 == 1 { tau[s] } else { 1.0 - tau[s] }).product();
        let active: Vec<usize> = (0..n).filter(|s| mask >> s & 1 == 1).collect();
        match active[..] {
            [] => {
                out.idle += p;
                out.t_av += p * mac.slot;
            }
            [s] => {
                out.success[s] += p;
                let spec = stations[s].class.spec();
                let ts = timing::success_duration(&spec, stations[s].payload_bytes, mac);
                let tc = timing::collision_duration(&spec, stations[s].payload_bytes, mac);
                out.t_av += p * ((1.0 - p_err[s]) * ts + p_err[s] * tc);
            }
            _ => {
                let slowest = active.iter().map(|&s| stations[s].class).min().unwrap();
                out.collision[slowest.index()] += p;
                out.t_av += p * class_tc(slowest);
            }
        }
    }
    out
}

fn class_strategy() -> impl Strategy<Value = RateClass> {
    (1u8..=4).prop_map(|id| RateClass::from_id(id).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn slot_partition_against_enumeration(
        cfg in prop::collection::vec((class_strategy(), 0.0..1.0f64, 0.0..0.5f64, 0u32..2000), 1..=10)
    ) {
        let stations: Vec<TimedStation> = cfg.iter().map(|c| TimedStation { class: c.0, payload_bytes: c.3 }).collect();
        let tau: Vec<f64> = cfg.iter().map(|c| c.1).collect();
        let p_err: Vec<f64> = cfg.iter().map(|c| c.2).collect();
        let mac = MacTimingParams::default();
        let b = timing::slot_breakdown(&stations, &tau, &p_err, &mac);
        let e = enumerate(&stations, &tau, &p_err, &mac);

        prop_assert!((b.total_probability() - 1.0).abs() < 1e-12);
        prop_assert!((1.0 - b.p_busy - e.idle).abs() < 1e-12);
        for s in 0..tau.len() {
            prop_assert!((b.p_success[s] - e.success[s]).abs() < 1e-12);
        }
        for c in RateClass::ALL {
            prop_assert!((b.p_collision(c) - e.collision[c.index()]).abs() < 1e-12);
        }
        prop_assert!((b.t_av - e.t_av).abs() < 1e-12 * e.t_av.max(1e-6));
    }

    #[test]
    fn chain_distribution_sums_to_one(
        q in 0.0..=1.0f64,
        p_eq in prop_oneof![0.0..0.999f64, 0.5 - 1e-8..0.5 + 1e-8, Just(0.5)],
        w_exp in 1u32..=7,
        m in 0u32..=7,
    ) {
        let backoff = BackoffParams { cw_min: 1 << w_exp, max_stage: m };
        let chain = StationChainState::small_queue(&backoff, q, p_eq).unwrap();
        let dist = chain.full_distribution(&backoff);
        let total: f64 = dist.iter().flatten().sum::<f64>() + chain.b_idle;
        prop_assert!((total - 1.0).abs() < 1e-12, "{total}");
        let heads: f64 = dist.iter().map(|row| row[0]).sum();
        prop_assert!((heads - chain.tau).abs() < 1e-12 * chain.tau.max(1.0));
    }

    #[test]
    fn closed_form_tau_matches_chain(q in 1e-6..=1.0f64, p_eq in 0.0..0.99f64) {
        let backoff = BackoffParams::default();
        let closed = markov::tau_small_queue(q, &backoff, p_eq).unwrap();
        let chain = StationChainState::small_queue(&backoff, q, p_eq).unwrap();
        prop_assert!((closed - chain.tau).abs() < 1e-12 * chain.tau.max(1e-3));
    }

    #[test]
    fn tau_grows_with_queue_occupancy(q in 0.0..0.99f64, dq in 1e-3..0.01f64, p in 0.0..0.95f64) {
        let b = BackoffParams::default();
        let t = markov::tau_small_queue(q, &b, p).unwrap();
        prop_assert!(markov::tau_small_queue(q + dq, &b, p).unwrap() > t);
    }

    #[test]
    fn saturated_tau_falls_with_failures(p in 0.0..0.95f64, dp in 1e-3..0.04f64) {
        let b = BackoffParams::default();
        let t = markov::tau_small_queue(1.0, &b, p).unwrap();
        prop_assert!(markov::tau_small_queue(1.0, &b, p + dp).unwrap() < t);
    }

    #[test]
    fn solver_fixed_point_holds(
        cfg in prop::collection::vec(
            (class_strategy(), prop_oneof![Just(f64::INFINITY), 0.0..800.0f64], 0.0..0.3f64),
            1..=6,
        )
    ) {
        let stations = cfg
            .iter()
            .map(|&(c, l, per)| {
                let arrival = if l.is_infinite() { Arrival::Saturated } else { Arrival::Rate(l) };
                StationConfig::new(c, arrival, 1028, ChannelSpec::FixedPer(per))
            })
            .collect();
        let scn = Scenario::new(stations, NetworkParams::default());
        let op = solve_operating_point(&scn, &SolverOptions::default()).unwrap();
        prop_assert!(op.residual <= 1e-10);

        // re-evaluate the equation chain at the returned point
        let pc = collision_probs(&op.tau);
        let t_av = timing::slot_breakdown(&scn.timed_stations(), &op.tau, &op.p_err, &scn.params.mac).t_av;
        prop_assert!((t_av - op.t_av).abs() <= 1e-9 * op.t_av);
        for s in 0..scn.len() {
            let q = markov::queue_nonempty_prob(scn.stations[s].arrival.lambda(), op.t_av);
            let p_eq = markov::equivalent_failure_prob(pc[s], op.p_err[s]);
            let tau = markov::tau_small_queue(q, &scn.params.backoff, p_eq).unwrap();
            prop_assert!((pc[s] - op.p_col[s]).abs() <= 1e-9);
            prop_assert!((q - op.q[s]).abs() <= 1e-9);
            prop_assert!((tau - op.tau[s]).abs() <= 1e-9);
            for v in [op.tau[s], op.p_col[s], op.p_eq[s], op.q[s]] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let report = aggregate_throughput(&op, &scn);
        prop_assert!(report.aggregate_bps >= 0.0);
        prop_assert!((report.per_station_bps.iter().sum::<f64>() - report.aggregate_bps).abs() <= 1e-9 * report.aggregate_bps.max(1.0));
    }
}

#[test]
fn single_station_closed_form() {
    let scn = uniform(1, RateClass::R1, Arrival::Saturated, ChannelSpec::Ideal);
    let op = solve_operating_point(&scn, &SolverOptions::default()).unwrap();
    let s = aggregate_throughput(&op, &scn).aggregate_bps;
    // one cycle: 15.5 idle slots on average, then one success
    let ts = timing::success_duration(&RateClass::R1.spec(), 1028, &MacTimingParams::default());
    let expected = 8.0 * 1028.0 / (15.5 * 20e-6 + ts);
    assert!((s - expected).abs() < 1e-9 * expected, "{s} vs {expected}");
}

#[test]
fn throughput_grows_with_load_while_unsaturated() {
    let mut prev = 0.0;
    for l in [0.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
        let scn = uniform(2, RateClass::R11, Arrival::Rate(l), ChannelSpec::Ideal);
        let s = aggregate_throughput(&solve_operating_point(&scn, &SolverOptions::default()).unwrap(), &scn).aggregate_bps;
        assert!(s >= prev, "λ={l}: {s} < {prev}");
        prev = s;
    }
}

#[test]
fn channel_errors_cost_throughput_in_saturation() {
    let opts = SolverOptions::default();
    let clean = uniform(4, RateClass::R5_5, Arrival::Saturated, ChannelSpec::Ideal);
    let noisy = uniform(4, RateClass::R5_5, Arrival::Saturated, ChannelSpec::FixedPer(0.08));
    let a = aggregate_throughput(&solve_operating_point(&clean, &opts).unwrap(), &clean).aggregate_bps;
    let b = aggregate_throughput(&solve_operating_point(&noisy, &opts).unwrap(), &noisy).aggregate_bps;
    assert!(b < a);
}

#[test]
fn slow_station_drags_down_saturated_cell() {
    let opts = SolverOptions::default();
    let mut mixed = uniform(3, RateClass::R11, Arrival::Saturated, ChannelSpec::Ideal);
    let fast = mixed.clone();
    mixed.stations[2].rate_class = RateClass::R1;
    let a = aggregate_throughput(&solve_operating_point(&fast, &opts).unwrap(), &fast).aggregate_bps;
    let b = aggregate_throughput(&solve_operating_point(&mixed, &opts).unwrap(), &mixed).aggregate_bps;
    assert!(b < 0.5 * a, "{b} vs {a}");
}
