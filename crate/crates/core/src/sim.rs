//! Slot-synchronous simulator of DCF basic access with Poisson arrivals,
//! bounded queues and Bernoulli frame errors.
//!
//! Time advances by one backoff slot `sigma` when nobody transmits and by
//! the frame exchange duration otherwise. Runs of idle slots are skipped in
//! one step. Every station that is in backoff decrements its counter once per
//! channel slot, idle or busy, so a channel slot here is the same unit the
//! analytical chain counts in.
//!
//! Each station owns a `ChaCha8Rng` seeded with `seed_from_u64(seed)` and
//! switched to stream `station_index`. Arrival gaps and backoff draws for a
//! station come from its own stream, in event order.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::BackoffParams;
use crate::scenario::Scenario;
use crate::timing;

pub const DEFAULT_QUEUE_CAPACITY: usize = 2;
/// Fraction of the run discarded before counters start.
pub const WARMUP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub duration_s: f64,
    pub seed: u64,
    pub queue_capacity: usize,
}

impl SimOptions {
    pub fn new(duration_s: f64, seed: u64) -> Self {
        Self { duration_s, seed, queue_capacity: DEFAULT_QUEUE_CAPACITY }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StationStats {
    pub attempts: u64,
    pub successes: u64,
    pub collisions: u64,
    pub channel_errors: u64,
    pub arrivals: u64,
    pub dropped: u64,
    pub delivered_bits: u64,
    pub throughput_bps: f64,
    /// Attempts per channel slot.
    pub tau_estimate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimReport {
    pub stations: Vec<StationStats>,
    /// Measured span in seconds, warm-up excluded.
    pub virtual_time: f64,
    pub total_slots: u64,
    pub aggregate_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MacState {
    /// Queue empty, no backoff pending.
    Idle,
    /// Counting down; transmits in the slot where the counter is zero.
    Backoff { stage: u32, counter: u64 },
}

struct Station {
    rng: ChaCha8Rng,
    arrivals: Option<Exp<f64>>,
    saturated: bool,
    queue: VecDeque<f64>,
    next_arrival: f64,
    state: MacState,
    t_success: f64,
    t_collision: f64,
    p_err: f64,
    payload_bits: u64,
    stats: StationStats,
}

impl Station {
    fn has_packet(&self) -> bool {
        self.saturated || !self.queue.is_empty()
    }

    fn draw(&mut self, backoff: &BackoffParams, stage: u32) {
        let counter = self.rng.random_range(0..backoff.window(stage));
        self.state = MacState::Backoff { stage, counter };
    }

    fn enqueue_until(&mut self, t: f64, capacity: usize) {
        let Some(exp) = self.arrivals else { return };
        while self.next_arrival <= t {
            self.stats.arrivals += 1;
            if self.queue.len() < capacity {
                self.queue.push_back(self.next_arrival);
            } else {
                self.stats.dropped += 1;
            }
            self.next_arrival += exp.sample(&mut self.rng);
        }
    }

    fn counter(&self) -> Option<u64> {
        match self.state {
            MacState::Backoff { counter, .. } => Some(counter),
            MacState::Idle => None,
        }
    }
}

/// Runs one replication.
pub fn run(scn: &Scenario, opts: &SimOptions) -> Result<SimReport> {
    scn.validate()?;
    if !(opts.duration_s >= 0.0) || opts.duration_s.is_infinite() {
        return Err(Error::Domain(format!("simulation duration {} s", opts.duration_s)));
    }
    if opts.queue_capacity == 0 {
        return Err(Error::InvalidScenario("queue capacity must be at least 1".into()));
    }
    if opts.duration_s == 0.0 {
        return Ok(SimReport { stations: vec![StationStats::default(); scn.len()], ..Default::default() });
    }

    let params = &scn.params;
    let backoff = params.backoff;
    let sigma = params.mac.slot;
    let p_err = scn.packet_error_rates()?;
    let mut stations: Vec<Station> = scn
        .stations
        .iter()
        .enumerate()
        .map(|(idx, cfg)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(idx as u64);
            let lambda = cfg.arrival.lambda();
            let saturated = cfg.arrival.is_saturated();
            let arrivals = (!saturated && lambda > 0.0)
                .then(|| Exp::new(lambda).expect("validated arrival rate"));
            let next_arrival = match arrivals {
                Some(exp) => exp.sample(&mut rng),
                None => f64::INFINITY,
            };
            let spec = cfg.rate_class.spec();
            Station {
                rng,
                arrivals,
                saturated,
                queue: VecDeque::with_capacity(opts.queue_capacity),
                next_arrival,
                state: MacState::Idle,
                t_success: timing::success_duration(&spec, cfg.payload_bytes, &params.mac),
                t_collision: timing::collision_duration(&spec, cfg.payload_bytes, &params.mac),
                p_err: p_err[idx],
                payload_bits: 8 * cfg.payload_bytes as u64,
                stats: StationStats::default(),
            }
        })
        .collect();
    for st in stations.iter_mut().filter(|s| s.saturated) {
        st.draw(&backoff, 0);
    }

    let end = opts.duration_s;
    let warmup = WARMUP_FRACTION * end;
    let mut t = 0.0_f64;
    let mut measuring = false;
    let mut start = 0.0;
    let mut slots = 0u64;
    let mut transmitters = Vec::with_capacity(stations.len());

    while t < end {
        if !measuring && t >= warmup {
            measuring = true;
            start = t;
            slots = 0;
            stations.iter_mut().for_each(|s| s.stats = StationStats::default());
        }

        transmitters.clear();
        transmitters.extend(stations.iter().enumerate().filter(|(_, s)| s.counter() == Some(0)).map(|(i, _)| i));

        let mut delivered = false;
        if transmitters.is_empty() {
            // skip to the next slot in which something can change
            let mut n = ((end - t) / sigma).ceil().max(1.0) as u64;
            if !measuring {
                n = n.min(((warmup - t) / sigma).ceil().max(1.0) as u64);
            }
            for st in &stations {
                n = match st.state {
                    MacState::Backoff { counter, .. } => n.min(counter),
                    MacState::Idle if st.next_arrival.is_finite() => {
                        n.min(((st.next_arrival - t) / sigma).floor().max(0.0) as u64 + 1)
                    }
                    MacState::Idle => n,
                };
            }
            for st in &mut stations {
                if let MacState::Backoff { counter, .. } = &mut st.state {
                    *counter -= n;
                }
            }
            t += n as f64 * sigma;
            slots += n;
        } else {
            let duration = if let [s] = transmitters[..] {
                let st = &mut stations[s];
                st.stats.attempts += 1;
                if st.p_err > 0.0 && st.rng.random_bool(st.p_err) {
                    st.stats.channel_errors += 1;
                    st.t_collision
                } else {
                    st.stats.successes += 1;
                    st.stats.delivered_bits += st.payload_bits;
                    delivered = true;
                    st.t_success
                }
            } else {
                transmitters
                    .iter()
                    .map(|&s| {
                        let st = &mut stations[s];
                        st.stats.attempts += 1;
                        st.stats.collisions += 1;
                        st.t_collision
                    })
                    .fold(0.0, f64::max)
            };
            for st in &mut stations {
                if let MacState::Backoff { counter, .. } = &mut st.state {
                    if *counter > 0 {
                        *counter -= 1;
                    }
                }
            }
            t += duration;
            slots += 1;
        }

        for st in &mut stations {
            st.enqueue_until(t, opts.queue_capacity);
        }
        for &s in &transmitters {
            let st = &mut stations[s];
            let MacState::Backoff { stage, .. } = st.state else { unreachable!("transmitter in backoff") };
            if delivered {
                if !st.saturated {
                    st.queue.pop_front();
                }
                if st.has_packet() {
                    st.draw(&backoff, 0);
                } else {
                    st.state = MacState::Idle;
                }
            } else {
                st.draw(&backoff, (stage + 1).min(backoff.max_stage));
            }
        }
        for st in &mut stations {
            if st.state == MacState::Idle && st.has_packet() {
                st.draw(&backoff, 0);
            }
        }
    }

    let virtual_time = t - start;
    let mut report = SimReport { virtual_time, total_slots: slots, ..Default::default() };
    for st in stations {
        let mut s = st.stats;
        s.throughput_bps = s.delivered_bits as f64 / virtual_time;
        s.tau_estimate = if slots > 0 { s.attempts as f64 / slots as f64 } else { 0.0 };
        report.aggregate_bps += s.throughput_bps;
        report.stations.push(s);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub seeds: Vec<u64>,
    pub runs: Vec<SimReport>,
    pub aggregate_mean_bps: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub aggregate_stddev_bps: f64,
    pub station_mean_bps: Vec<f64>,
    pub station_stddev_bps: Vec<f64>,
    pub tau_mean: Vec<f64>,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Independent replications, one per seed, run in parallel and reported in
/// seed-list order. `opts.seed` is ignored.
pub fn batch(scn: &Scenario, opts: &SimOptions, seeds: &[u64]) -> Result<BatchReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidScenario("batch needs at least one seed".into()));
    }
    let runs = seeds
        .par_iter()
        .map(|&seed| run(scn, &SimOptions { seed, ..*opts }))
        .collect::<Result<Vec<_>>>()?;
    let (aggregate_mean_bps, aggregate_stddev_bps) = mean_std(runs.iter().map(|r| r.aggregate_bps));
    let mut station_mean_bps = Vec::with_capacity(scn.len());
    let mut station_stddev_bps = Vec::with_capacity(scn.len());
    let mut tau_mean = Vec::with_capacity(scn.len());
    for s in 0..scn.len() {
        let (m, sd) = mean_std(runs.iter().map(|r| r.stations[s].throughput_bps));
        station_mean_bps.push(m);
        station_stddev_bps.push(sd);
        tau_mean.push(mean_std(runs.iter().map(|r| r.stations[s].tau_estimate)).0);
    }
    Ok(BatchReport {
        seeds: seeds.to_vec(),
        runs,
        aggregate_mean_bps,
        aggregate_stddev_bps,
        station_mean_bps,
        station_stddev_bps,
        tau_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::RateClass;
    use crate::scenario::{presets, Arrival, ChannelSpec, NetworkParams, StationConfig};

    fn single(arrival: Arrival) -> Scenario {
        Scenario::new(
            vec![StationConfig::new(RateClass::R11, arrival, 1028, ChannelSpec::Ideal)],
            NetworkParams::default(),
        )
    }

    #[test]
    fn silent_station() {
        let r = run(&single(Arrival::Rate(0.0)), &SimOptions::new(5.0, 1)).unwrap();
        assert_eq!(r.aggregate_bps, 0.0);
        assert_eq!(r.stations[0].attempts, 0);
        assert!(r.virtual_time >= 0.95 * 5.0 - 1e-9);
    }

    #[test]
    fn zero_duration_is_empty() {
        let r = run(&presets::scenario2(10.0, 0.0), &SimOptions::new(0.0, 1)).unwrap();
        assert_eq!(r.stations.len(), 8);
        assert_eq!(r.virtual_time, 0.0);
        assert_eq!(r.aggregate_bps, 0.0);
    }

    #[test]
    fn rejects_bad_options() {
        let scn = single(Arrival::Saturated);
        assert!(run(&scn, &SimOptions::new(-1.0, 1)).is_err());
        assert!(run(&scn, &SimOptions { queue_capacity: 0, ..SimOptions::new(1.0, 1) }).is_err());
    }

    #[test]
    fn report_accounting() {
        let scn = presets::scenario2(100.0, 0.08);
        let r = run(&scn, &SimOptions::new(5.0, 3)).unwrap();
        let mut total = 0.0;
        for (st, cfg) in r.stations.iter().zip(&scn.stations) {
            assert_eq!(st.attempts, st.successes + st.collisions + st.channel_errors);
            assert_eq!(st.delivered_bits, st.successes * 8 * cfg.payload_bytes as u64);
            assert_eq!(st.throughput_bps, st.delivered_bits as f64 / r.virtual_time);
            total += st.throughput_bps;
        }
        assert!((total - r.aggregate_bps).abs() <= 1e-9 * total);
    }

    #[test]
    fn seeds_give_different_runs() {
        let scn = presets::scenario2(50.0, 0.0);
        let a = run(&scn, &SimOptions::new(2.0, 1)).unwrap();
        let b = run(&scn, &SimOptions::new(2.0, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn batch_is_ordered_by_seed_list() {
        let scn = presets::scenario2(50.0, 0.0);
        let opts = SimOptions::new(1.0, 0);
        let b = batch(&scn, &opts, &[7, 3]).unwrap();
        assert_eq!(b.runs[0], run(&scn, &SimOptions::new(1.0, 7)).unwrap());
        assert_eq!(b.runs[1], run(&scn, &SimOptions::new(1.0, 3)).unwrap());
        assert!(batch(&scn, &opts, &[]).is_err());
    }
}
