//! Dark-state control pulses and their mapping to physical drives.

mod dark;
mod design;
mod invert;
mod shape;

pub use dark::{dark_state_amplitudes, dark_state_ode, DarkStateTrajectory};
pub use design::{design_from_spec, design_transfer, DesignOptions, TransferDesign};
pub use invert::{
    exact_decay_rate, invert_rate_exact, invert_rate_to_drive, rate_branch_peak, Control,
    DrivePoint, RateInverter, OFF_RATIO,
};
pub use shape::{gamma_pulse, PulseSchedule, PulseSpec};

use crate::netlin::NetError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("shape parameter c = {c:e} must exceed pi*gamma0^2/4 = {bound:e}")]
    Shape { c: f64, bound: f64 },
    #[error("pulse breaks the dark state: norm loss {norm_loss:e} exceeds bound {bound:e}")]
    Defect { norm_loss: f64, bound: f64 },
    #[error("target rate {target:e} exceeds the achievable maximum {max:e}")]
    Saturation { target: f64, max: f64 },
    #[error("residual {target:e} not reached within t_f = {t_max:e} (best {best:e})")]
    Unreachable { target: f64, t_max: f64, best: f64 },
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("invalid design input: {0}")]
    Input(String),
    #[error(transparent)]
    Net(#[from] NetError),
}
