//! Command bodies. Each returns the full output text so callers decide
//! where it goes.

use std::fmt::Write as _;

use dcf_core::phy::{self, db_to_linear, linear_to_db, Fading, PhyConfig, RateClass};
use dcf_core::sim::{batch, SimOptions};
use dcf_core::solver::{self, aggregate_throughput, critical_rate, solve_operating_point, SolverOptions, SweepAxis};
use dcf_core::{NetworkParams, Scenario};

use crate::error::{CliError, Result};

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `steps` evenly spaced points from `from` to `to` inclusive, or
/// geometrically spaced when `log` is set.
pub fn grid(from: f64, to: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Invalid(format!("grid needs finite bounds and steps >= 1 (got {from}, {to}, {steps})")));
    }
    if log && !(from > 0.0 && to > 0.0) {
        return Err(CliError::Invalid("log grid needs positive bounds".into()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let n = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / n;
            if i == steps - 1 {
                to
            } else if log {
                from * (to / from).powf(t)
            } else {
                from + (to - from) * t
            }
        })
        .collect())
}

/// `lambda:all`, `lambda:<station>` or `distance:<station>`.
pub fn parse_axis(s: &str) -> Result<SweepAxis> {
    let bad = || CliError::Invalid(format!("axis must be lambda:all, lambda:<i> or distance:<i>, got `{s}`"));
    let (kind, which) = s.split_once(':').ok_or_else(bad)?;
    match (kind, which) {
        ("lambda", "all") => Ok(SweepAxis::LambdaAll),
        ("lambda", i) => Ok(SweepAxis::Lambda(i.parse().map_err(|_| bad())?)),
        ("distance", i) => Ok(SweepAxis::Distance(i.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

pub fn solve_text(scn: &Scenario, opts: &SolverOptions) -> Result<String> {
    let op = solve_operating_point(scn, opts)?;
    let r = aggregate_throughput(&op, scn);
    let mut out = String::new();
    writeln!(out, "stations: {}  T_av: {} s  iterations: {}  residual: {:e}", scn.len(), op.t_av, op.iterations, op.residual).unwrap();
    writeln!(out, "{:>7} {:>5} {:>12} {:>10} {:>20} {:>20} {:>20} {:>16}", "station", "class", "lambda", "per", "tau", "p_col", "q", "throughput_bps").unwrap();
    for (s, st) in scn.stations.iter().enumerate() {
        writeln!(
            out,
            "{:>7} {:>5} {:>12} {:>10.6} {:>20} {:>20} {:>20} {:>16.1}",
            s,
            st.rate_class.id(),
            st.arrival.lambda(),
            op.p_err[s],
            op.tau[s],
            op.p_col[s],
            op.q[s],
            r.per_station_bps[s]
        )
        .unwrap();
    }
    writeln!(
        out,
        "aggregate throughput: {:.1} bit/s  linear model: {:.1} bit/s  in region D: {}",
        r.aggregate_bps,
        r.linear_bps,
        if r.in_region_d { "yes" } else { "no" }
    )
    .unwrap();
    Ok(out)
}

pub fn solve_csv(scn: &Scenario, opts: &SolverOptions) -> Result<String> {
    let op = solve_operating_point(scn, opts)?;
    let r = aggregate_throughput(&op, scn);
    let mut w = csv_writer();
    w.write_record([
        "station", "rate_class", "lambda_pkt_s", "per", "tau", "p_col", "p_eq", "q", "throughput_bps", "lambda_c_pkt_s",
        "aggregate_bps", "linear_bps", "t_av_s", "residual", "iterations",
    ])?;
    for (s, st) in scn.stations.iter().enumerate() {
        w.write_record([
            s.to_string(),
            st.rate_class.id().to_string(),
            st.arrival.lambda().to_string(),
            op.p_err[s].to_string(),
            op.tau[s].to_string(),
            op.p_col[s].to_string(),
            op.p_eq[s].to_string(),
            op.q[s].to_string(),
            r.per_station_bps[s].to_string(),
            r.critical_rates[s].to_string(),
            r.aggregate_bps.to_string(),
            r.linear_bps.to_string(),
            op.t_av.to_string(),
            op.residual.to_string(),
            op.iterations.to_string(),
        ])?;
    }
    finish(w)
}

pub fn sweep_csv(scn: &Scenario, axis: SweepAxis, xs: &[f64], opts: &SolverOptions) -> Result<String> {
    let points = solver::sweep(scn, axis, xs, opts)?;
    let mut w = csv_writer();
    let mut header = vec![match axis {
        SweepAxis::Distance(_) => "distance_m".to_string(),
        _ => "lambda_pkt_s".to_string(),
    }];
    for s in 0..scn.len() {
        header.extend([format!("rate_class_{s}"), format!("per_{s}"), format!("tau_{s}"), format!("throughput_bps_{s}")]);
    }
    header.extend(["aggregate_bps", "linear_bps", "in_region_d", "t_av_s", "iterations"].map(String::from));
    w.write_record(&header)?;
    for p in &points {
        let mut row = vec![p.x.to_string()];
        for s in 0..scn.len() {
            row.extend([
                p.classes[s].id().to_string(),
                p.op.p_err[s].to_string(),
                p.op.tau[s].to_string(),
                p.report.per_station_bps[s].to_string(),
            ]);
        }
        row.extend([
            p.report.aggregate_bps.to_string(),
            p.report.linear_bps.to_string(),
            p.report.in_region_d.to_string(),
            p.op.t_av.to_string(),
            p.op.iterations.to_string(),
        ]);
        w.write_record(&row)?;
    }
    finish(w)
}

fn relative_deviation(sim: f64, model: f64) -> f64 {
    if model == 0.0 {
        if sim == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (sim - model) / model
    }
}

/// Simulation replications next to the model prediction, one row per
/// station and a final `all` row.
pub fn sim_csv(scn: &Scenario, solver_opts: &SolverOptions, sim: &SimOptions, seeds: &[u64]) -> Result<String> {
    let op = solve_operating_point(scn, solver_opts)?;
    let model = aggregate_throughput(&op, scn);
    let b = batch(scn, sim, seeds)?;
    let total = |f: &dyn Fn(&dcf_core::sim::StationStats) -> u64, s: usize| -> u64 {
        b.runs.iter().map(|r| f(&r.stations[s])).sum()
    };
    let mut w = csv_writer();
    w.write_record([
        "station", "rate_class", "lambda_pkt_s", "model_bps", "sim_mean_bps", "sim_stddev_bps", "deviation", "model_tau",
        "sim_tau", "attempts", "successes", "collisions", "channel_errors", "dropped",
    ])?;
    for (s, st) in scn.stations.iter().enumerate() {
        w.write_record([
            s.to_string(),
            st.rate_class.id().to_string(),
            st.arrival.lambda().to_string(),
            model.per_station_bps[s].to_string(),
            b.station_mean_bps[s].to_string(),
            b.station_stddev_bps[s].to_string(),
            relative_deviation(b.station_mean_bps[s], model.per_station_bps[s]).to_string(),
            op.tau[s].to_string(),
            b.tau_mean[s].to_string(),
            total(&|x| x.attempts, s).to_string(),
            total(&|x| x.successes, s).to_string(),
            total(&|x| x.collisions, s).to_string(),
            total(&|x| x.channel_errors, s).to_string(),
            total(&|x| x.dropped, s).to_string(),
        ])?;
    }
    let sum = |f: &dyn Fn(&dcf_core::sim::StationStats) -> u64| -> u64 { (0..scn.len()).map(|s| total(f, s)).sum() };
    w.write_record([
        "all".to_string(),
        String::new(),
        scn.lambdas().iter().sum::<f64>().to_string(),
        model.aggregate_bps.to_string(),
        b.aggregate_mean_bps.to_string(),
        b.aggregate_stddev_bps.to_string(),
        relative_deviation(b.aggregate_mean_bps, model.aggregate_bps).to_string(),
        op.tau.iter().sum::<f64>().to_string(),
        b.tau_mean.iter().sum::<f64>().to_string(),
        sum(&|x| x.attempts).to_string(),
        sum(&|x| x.successes).to_string(),
        sum(&|x| x.collisions).to_string(),
        sum(&|x| x.channel_errors).to_string(),
        sum(&|x| x.dropped).to_string(),
    ])?;
    finish(w)
}

/// `(class, lambda_c)` for every rate class.
pub fn critical_rates(params: &NetworkParams, payload_bytes: u32) -> Vec<(RateClass, f64)> {
    RateClass::ALL.iter().map(|&c| (c, critical_rate(&c.spec(), params, payload_bytes))).collect()
}

pub fn critical_rates_text(params: &NetworkParams, payload_bytes: u32) -> String {
    let mut out = format!("critical packet rates, payload {payload_bytes} B\n{:>5} {:>9} {:>16}\n", "class", "rate_mbps", "lambda_c_pkt_s");
    for (c, l) in critical_rates(params, payload_bytes) {
        writeln!(out, "{:>5} {:>9} {:>16.2}", c.id(), c.spec().data_rate_bps / 1e6, l).unwrap();
    }
    out
}

pub fn critical_rates_csv(params: &NetworkParams, payload_bytes: u32) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["rate_class", "data_rate_bps", "payload_bytes", "lambda_c_pkt_s"])?;
    for (c, l) in critical_rates(params, payload_bytes) {
        w.write_record([c.id().to_string(), c.spec().data_rate_bps.to_string(), payload_bytes.to_string(), l.to_string()])?;
    }
    finish(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhyAxis {
    /// Channel SNR in dB (before spreading gain).
    SnrDb,
    DistanceM,
}

/// BER of the class modulation and FER of a full frame along SNR or distance.
pub fn phy_curves_csv(
    params: &NetworkParams,
    class: RateClass,
    fading: Fading,
    axis: PhyAxis,
    xs: &[f64],
    payload_bytes: u32,
) -> Result<String> {
    let phy_cfg = PhyConfig { fading, ..params.phy };
    let spec = class.spec();
    let layout = params.layout(payload_bytes);
    let mut w = csv_writer();
    w.write_record([
        match axis {
            PhyAxis::SnrDb => "snr_db",
            PhyAxis::DistanceM => "distance_m",
        },
        "snr_db",
        "gamma_db",
        "ber",
        "fer",
    ])?;
    for &x in xs {
        let snr = match axis {
            PhyAxis::SnrDb => x,
            PhyAxis::DistanceM => phy::received_snr(x, &params.propagation)?,
        };
        let gamma_db = phy::snr_per_bit(snr, &spec);
        let gamma_basic = db_to_linear(phy::snr_per_bit(snr, &phy_cfg.basic_class.spec()));
        let gamma = db_to_linear(gamma_db);
        let ber = phy::ber_with(gamma, spec.modulation, fading, phy_cfg.cck_exponent)?;
        let fer = phy::fer(&layout, &spec, &phy_cfg, gamma_basic, gamma)?;
        debug_assert!((linear_to_db(gamma) - gamma_db).abs() < 1e-9);
        w.write_record([x.to_string(), snr.to_string(), gamma_db.to_string(), ber.to_string(), fer.to_string()])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_grids() {
        assert_eq!(grid(0.0, 1.0, 3, false).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = grid(1.0, 100.0, 3, true).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
        assert_eq!(grid(5.0, 9.0, 1, false).unwrap(), vec![5.0]);
        assert!(grid(0.0, 1.0, 0, false).is_err());
        assert!(grid(0.0, 1.0, 4, true).is_err());
    }

    #[test]
    fn axis_names() {
        assert_eq!(parse_axis("lambda:all").unwrap(), SweepAxis::LambdaAll);
        assert_eq!(parse_axis("lambda:3").unwrap(), SweepAxis::Lambda(3));
        assert_eq!(parse_axis("distance:2").unwrap(), SweepAxis::Distance(2));
        assert!(parse_axis("speed:1").is_err());
        assert!(parse_axis("lambda").is_err());
    }

    #[test]
    fn critical_rate_table_shape() {
        let csv = critical_rates_csv(&NetworkParams::default(), 1028).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
}
