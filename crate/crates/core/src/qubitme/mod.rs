//! Reduced master equation of two cascaded qubits.

mod fidelity;
mod generator;
mod integrate;
mod state;

pub use fidelity::{average_fidelity, cardinal_states, FidelityReport};
pub use generator::{apply_generator, GeneratorSlice};
pub use integrate::{integrate, IntegrateOptions, Trajectory};
pub use state::{partial_trace_1, TwoQubitState};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeError {
    #[error("invalid generator parameter `{field}` = {value}")]
    Parameter { field: &'static str, value: f64 },
    #[error("state invariant violated: {0}")]
    Invariant(String),
    #[error("step size too large: {detail} at t = {t} (step {step})")]
    StepSize { t: f64, step: usize, detail: String },
    #[error("invalid grid: {0}")]
    Grid(String),
}
