//! Simulation of qubit state transfer through fiber-linked opto-mechanical
//! transducers.

pub mod multimode;
pub mod netlin;
pub mod oracle;
pub mod params;
pub mod pulses;
pub mod qubitme;
pub mod scenario;

pub use params::{NodeParams, ParamError};
