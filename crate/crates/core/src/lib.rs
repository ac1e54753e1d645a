//! Analytical model of the IEEE 802.11b Distributed Coordination Function
//! for multirate cells with channel errors and Poisson traffic, plus a
//! slot-synchronous MAC simulator used to validate it.
//!
//! The pieces stack bottom-up:
//!
//! - [`phy`]: path loss, SNR, per-modulation BER and frame error rate.
//! - [`markov`]: closed-form stationary solution of the per-station
//!   backoff chain (idle state, retry stages, transmission probability).
//! - [`timing`]: expected slot duration with intra/inter rate-class
//!   collision accounting.
//! - [`solver`]: the coupled per-station fixed point, aggregate throughput,
//!   the linear low-load model and critical packet rates.
//! - [`sim`]: discrete-event simulation of basic access (DATA + ACK).

pub mod error;
pub mod markov;
pub mod phy;
pub mod scenario;
pub mod sim;
pub mod solver;
pub mod timing;

pub use error::{Error, Result};
pub use scenario::{Arrival, ChannelSpec, NetworkParams, Scenario, StationConfig};
