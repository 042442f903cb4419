//! Brute-force check of the adiabatic elimination: one node (qubit,
//! mechanical mode, cavity mode) in a truncated Fock space under the full
//! Lindblad dynamics, with rate and occupation fits on the qubit
//! population.

mod fit;
mod fock;

pub use fit::{extract_rate_and_noise, run_oracle, OracleFit, OracleReport, OracleSettings};
pub use fock::{
    check_convergence, default_step, evolve, FockNode, OracleInitial, OracleTrajectory,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid oracle input: {0}")]
    Input(String),
    #[error("Fock truncation too small: top-level population {population:e} at t = {t}")]
    Truncation { population: f64, t: f64 },
    #[error("step size not converged: halving dt changes observables by {diff:e}")]
    StepConvergence { diff: f64 },
    #[error("state invariant violated at t = {t}: {detail}")]
    Invariant { t: f64, detail: String },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Net(#[from] crate::netlin::NetError),
}
