//! Linearized cascaded network of opto-mechanical nodes.
//!
//! Each node contributes the doubled phase-space block `(b, b†, c, c†)`.
//! Nodes are chained along a unidirectional fiber, so the drift is block
//! lower-triangular. From the drift and diffusion we get the stationary
//! covariance, the resonator spectra seen by the qubits, and from those the
//! rates that parametrize the reduced two-qubit master equation.

mod approx;
mod network;
mod rates;

pub use approx::{
    cooling_rate_approx, decay_rate_approx, local_noise_approx, normal_mode_frequencies,
};
pub use network::{build_network, LinearNetworkModel};
pub use rates::EffectiveRates;

use crate::params::ParamError;
use thiserror::Error;

/// Rates below this value (in reference units) are treated as zero.
pub const RATE_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("network needs at least one node")]
    NoNodes,
    #[error("node {node}: {source}")]
    InvalidParams {
        node: usize,
        #[source]
        source: ParamError,
    },
    #[error("node {node} is not stable: drift eigenvalue with real part {max_re:e}")]
    Unstable { node: usize, max_re: f64 },
    #[error("node index {0} out of range")]
    NodeIndex(usize),
    #[error("Lyapunov system is ill-conditioned (condition number {cond:e})")]
    SingularLyapunov { cond: f64 },
    #[error("Lyapunov residual {residual:e} exceeds tolerance {tolerance:e}")]
    LyapunovResidual { residual: f64, tolerance: f64 },
    #[error("resolvent is singular at omega = {omega}")]
    Resolvent { omega: f64 },
    #[error("decay rate of node {node} is degenerate ({gamma:e})")]
    DegenerateRate { node: usize, gamma: f64 },
    #[error("effective occupation of node {node} is negative ({n:e})")]
    NegativeOccupation { node: usize, n: f64 },
    #[error("effective rates are defined for one or two nodes, got {0}")]
    UnsupportedNodeCount(usize),
    #[error("approximate decay rate has a pole at these parameters")]
    Pole,
    #[error("thermal noise term diverges for G = 0")]
    Divergence,
    #[error("Stokes term needs delta_c * omega_q > 0")]
    StokesSign,
    #[error("mode splitting needs 2|G| < omega_r (got |G| = {g}, omega_r = {omega_r})")]
    ImaginaryBranch { g: f64, omega_r: f64 },
}
