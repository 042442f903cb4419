//! Scenario files, transfer runs, parameter sweeps and CSV export.

mod config;
mod export;
mod sweep;
mod transfer;

pub use config::{
    load_config, parse_config, preset, preset_names, PulseChoice, Scale, ScenarioConfig, SweepAxis,
    Units,
};
pub use export::{
    fit_csv, multimode_csv, oracle_csv, pulse_csv, rates_csv, sweep_csv, transfer_csv, write_csv,
    CsvTable,
};
pub use sweep::{
    run_axis, sweep_and_fit, AxisFit, Channel, FitResult, SweepOptions, SweepPoint,
};
pub use transfer::{rate_scan, rate_slices, run_transfer, transfer_with, RateScanRow, TransferReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("unit mismatch in `{field}`: expected {expected}, found {found}")]
    UnitMismatch { field: String, expected: String, found: String },
    #[error("{context}: {message}")]
    Numerical { context: String, message: String },
    #[error("sweep `{axis}` leaves the linear regime: {message}")]
    Range { axis: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn config(path: impl Into<String>, message: impl ToString) -> Self {
        Self::Config { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn numerical(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::Numerical { context: context.into(), message: err.to_string() }
    }

    /// Process exit code: 2 for invalid input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::UnitMismatch { .. } | Self::Io { .. } => 2,
            Self::Numerical { .. } | Self::Range { .. } => 3,
        }
    }
}
