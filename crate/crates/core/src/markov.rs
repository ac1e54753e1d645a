//! Closed-form stationary solution of the per-station backoff chain.
//!
//! States are `(i, k)` with backoff stage `i ∈ [0, m]` and counter
//! `k ∈ [0, W_i - 1]`, plus an idle state `I` entered after a success that
//! leaves the queue empty. A station transmits from every `(i, 0)`; a failed
//! attempt (collision or channel error, probability `P_eq`) moves to stage
//! `i + 1`, and stage `m` repeats forever (no retry limit).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackoffParams {
    /// Minimum contention window `W_0`, in slots.
    pub cw_min: u32,
    /// Number of doubling stages `m`.
    pub max_stage: u32,
}

impl Default for BackoffParams {
    fn default() -> Self {
        Self { cw_min: 32, max_stage: 5 }
    }
}

impl BackoffParams {
    pub fn validate(&self) -> Result<()> {
        if self.cw_min < 1 {
            return Err(Error::InvalidScenario("cw_min must be at least 1".into()));
        }
        if self.max_stage > 20 {
            return Err(Error::InvalidScenario(format!("max_stage {} is unreasonably large", self.max_stage)));
        }
        Ok(())
    }

    /// `W_i = 2^min(i, m) W_0`.
    pub fn window(&self, stage: u32) -> u64 {
        (self.cw_min as u64) << stage.min(self.max_stage)
    }

    pub fn cw_max(&self) -> u64 {
        self.window(self.max_stage)
    }
}

/// Failure probability of one attempt: collision or, independently,
/// channel corruption.
pub fn equivalent_failure_prob(p_col: f64, p_err: f64) -> f64 {
    p_col + p_err - p_err * p_col
}

/// Normalisation constant `alpha` with `alpha * b_00 + b_I = 1`.
pub fn alpha(backoff: &BackoffParams, p_eq: f64) -> Result<f64> {
    if p_eq >= 1.0 {
        return Err(Error::RetryDivergence);
    }
    if !(0.0..1.0).contains(&p_eq) {
        return Err(Error::Domain(format!("P_eq = {p_eq} outside [0, 1)")));
    }
    let w0 = backoff.cw_min as f64;
    let xm = (2.0 * p_eq).powi(backoff.max_stage as i32);
    let geometric = doubling_sum(backoff.max_stage, p_eq);
    Ok(0.5 * (w0 * (geometric + xm / (1.0 - p_eq)) + 1.0 / (1.0 - p_eq)))
}

/// `(1 - (2P)^m) / (1 - 2P)` summed term by term, so it has no pole at
/// `P = 1/2` and loses no digits next to it.
fn doubling_sum(m: u32, p: f64) -> f64 {
    let x = 2.0 * p;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..m {
        sum += term;
        term *= x;
    }
    sum
}

/// Transmission probability from the idle-state probability and `alpha`.
pub fn tau_general(b_idle: f64, alpha: f64, p_eq: f64) -> f64 {
    (1.0 - b_idle) / (alpha * (1.0 - p_eq))
}

/// Transmission probability under the small-queue closure `q = P_{I,0}`:
///
/// ```text
/// tau = 2q / ( q[(W_0 + 1) + W_0 P G] + 2(1 - q)(1 - P) ),  G = sum_{k<m} (2P)^k
/// ```
///
/// This is the usual `2(1-2P)q / D` with the common `1 - 2P` factor
/// cancelled, so it is regular at `P = 1/2` and finite at `P = 1`.
pub fn tau_small_queue(q: f64, backoff: &BackoffParams, p_eq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p_eq) {
        return Err(Error::Domain(format!("q = {q}, P_eq = {p_eq} must lie in [0, 1]")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let w0 = backoff.cw_min as f64;
    let g = doubling_sum(backoff.max_stage, p_eq);
    let d = q * ((w0 + 1.0) + w0 * p_eq * g) + 2.0 * (1.0 - q) * (1.0 - p_eq);
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::Degenerate(format!("D(q={q}, P_eq={p_eq}) = {d}")));
    }
    Ok(2.0 * q / d)
}

/// Probability that at least one packet arrives during a mean slot:
/// `1 - exp(-lambda * T_av)`. An infinite rate gives 1.
pub fn queue_nonempty_prob(lambda: f64, t_av: f64) -> f64 {
    if lambda.is_infinite() {
        return 1.0;
    }
    -(-lambda * t_av).exp_m1()
}

/// Stationary quantities of one station's chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationChainState {
    pub p_eq: f64,
    /// Probability the queue is non-empty after a success.
    pub q: f64,
    /// Probability of leaving the idle state in a slot.
    pub p_idle_exit: f64,
    pub alpha: f64,
    pub b00: f64,
    pub b_idle: f64,
    pub tau: f64,
}

impl StationChainState {
    /// Solves the chain for given `q`, `P_{I,0}` and `P_eq < 1`.
    pub fn solve(backoff: &BackoffParams, q: f64, p_idle_exit: f64, p_eq: f64) -> Result<Self> {
        for (name, v) in [("q", q), ("P_I0", p_idle_exit), ("P_eq", p_eq)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let alpha = alpha(backoff, p_eq)?;
        let (b00, b_idle) = if q >= 1.0 {
            (1.0 / alpha, 0.0)
        } else if p_idle_exit == 0.0 {
            // never leaves the idle state once there
            (0.0, 1.0)
        } else {
            let idle_ratio = (1.0 - q) / p_idle_exit;
            let b00 = 1.0 / (alpha + idle_ratio);
            (b00, idle_ratio * b00)
        };
        Ok(Self { p_eq, q, p_idle_exit, alpha, b00, b_idle, tau: b00 / (1.0 - p_eq) })
    }

    /// Small-queue closure: `P_{I,0} = q`.
    pub fn small_queue(backoff: &BackoffParams, q: f64, p_eq: f64) -> Result<Self> {
        Self::solve(backoff, q, q, p_eq)
    }

    /// `b_{i,0}` for every stage.
    pub fn transmit_states(&self, backoff: &BackoffParams) -> Vec<f64> {
        let m = backoff.max_stage as i32;
        (0..=m)
            .map(|i| {
                if i < m {
                    self.p_eq.powi(i) * self.b00
                } else {
                    self.p_eq.powi(m) / (1.0 - self.p_eq) * self.b00
                }
            })
            .collect()
    }

    /// Every `b_{i,k}`, reconstructed state by state. Row `i` has `W_i`
    /// entries. Intended for checks on small windows.
    pub fn full_distribution(&self, backoff: &BackoffParams) -> Vec<Vec<f64>> {
        let heads = self.transmit_states(backoff);
        let m = backoff.max_stage as usize;
        let sum_heads: f64 = heads.iter().sum();
        (0..=m)
            .map(|i| {
                let w = backoff.window(i as u32);
                let mut inflow = match i {
                    0 => self.q * (1.0 - self.p_eq) * sum_heads + self.p_idle_exit * self.b_idle,
                    _ => self.p_eq * heads[i - 1],
                };
                if i == m {
                    inflow += self.p_eq * heads[m];
                }
                (0..w).map(|k| (w - k) as f64 / w as f64 * inflow).collect()
            })
            .collect()
    }
}
