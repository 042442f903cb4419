use rayon::prelude::*;

use super::{PulseChoice, ScenarioConfig, ScenarioError};
use crate::netlin::{build_network, decay_rate_approx, local_noise_approx, EffectiveRates};
use crate::params::NodeParams;
use crate::pulses::{design_from_spec, design_transfer, exact_decay_rate, DesignOptions, DrivePoint, TransferDesign};
use crate::qubitme::{average_fidelity, integrate, GeneratorSlice, IntegrateOptions, TwoQubitState};

/// Outcome of one simulated transfer.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub average: f64,
    pub labels: Vec<&'static str>,
    pub per_state: Vec<f64>,
    /// Emitter population `|v1(t_f)|^2` left by the ideal dark-state dynamics.
    pub residual: f64,
    pub t_f: f64,
    pub design: TransferDesign,
    /// Master-equation parameters along the pulse grid.
    pub rates: Vec<EffectiveRates>,
}

impl TransferReport {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.average
    }
}

/// Effective rates of the driven chain at every pulse grid point.
pub fn rate_slices(nodes: &[NodeParams; 2], design: &TransferDesign) -> Result<Vec<EffectiveRates>, ScenarioError> {
    let s = &design.schedule;
    (0..s.len())
        .into_par_iter()
        .map(|k| {
            let p1 = DrivePoint { g: s.g1[k], delta_c: s.delta_c1[k] }.apply(&nodes[0]);
            let p2 = DrivePoint { g: s.g2[k], delta_c: s.delta_c2[k] }.apply(&nodes[1]);
            build_network(&[p1, p2])
                .and_then(|m| m.effective_rates(&[p1.omega_q, p2.omega_q]))
                .map_err(|e| ScenarioError::numerical(format!("rates at t = {}", s.grid[k]), e))
        })
        .collect()
}

/// Designs the pulses, evaluates the rates along them and integrates the
/// master equation for the six cardinal input states.
pub fn transfer_with(
    nodes: &[NodeParams; 2],
    t2: [f64; 2],
    pulse: &PulseChoice,
    opts: &DesignOptions,
) -> Result<TransferReport, ScenarioError> {
    let design = match pulse {
        PulseChoice::Auto { residual_target } => design_transfer(&nodes[0], &nodes[1], *residual_target, opts),
        PulseChoice::Manual(spec) => design_from_spec(&nodes[0], &nodes[1], spec, opts),
    }
    .map_err(|e| ScenarioError::numerical("pulse", e))?;
    let rates = rate_slices(nodes, &design)?;
    let slices: Vec<GeneratorSlice> = rates.iter().map(|r| GeneratorSlice::new(r.clone(), t2)).collect();
    let grid = &design.schedule.grid;
    let iopts = IntegrateOptions::default();
    let run = |initial: &TwoQubitState| -> Result<TwoQubitState, ScenarioError> {
        integrate(initial, grid, &slices, &iopts)
            .map(|tr| tr.last().clone())
            .map_err(|e| ScenarioError::numerical("master equation", e))
    };
    let fid = average_fidelity(run, design.v2_phase)?;
    Ok(TransferReport {
        average: fid.average,
        labels: fid.labels,
        per_state: fid.per_state,
        residual: design.residual,
        t_f: design.spec.t_f,
        design,
        rates,
    })
}

pub fn run_transfer(cfg: &ScenarioConfig) -> Result<TransferReport, ScenarioError> {
    transfer_with(&cfg.nodes, cfg.t2, &cfg.pulse, &cfg.design)
}

/// Single-node rates of the first node against the drive strength, with
/// the laser frequency held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateScanRow {
    pub g: f64,
    pub gamma_exact: f64,
    pub gamma_approx: f64,
    pub n_local: f64,
    pub n_local_approx: f64,
}

pub fn rate_scan(cfg: &ScenarioConfig, g_max: f64, points: usize) -> Result<Vec<RateScanRow>, ScenarioError> {
    if points < 2 || !(g_max > 0.0) {
        return Err(ScenarioError::config("rates", format!("bad scan: {points} points up to {g_max}")));
    }
    let base = cfg.nodes[0];
    (1..=points)
        .into_par_iter()
        .map(|k| {
            let g = g_max * k as f64 / points as f64;
            let p = base.with_drive_at_fixed_laser(g);
            let ctx = |e: crate::netlin::NetError| ScenarioError::numerical(format!("rates at G = {g}"), e);
            let rates = build_network(&[p]).and_then(|m| m.effective_rates(&[p.omega_q])).map_err(ctx)?;
            Ok(RateScanRow {
                g,
                gamma_exact: exact_decay_rate(&p).map_err(ctx)?,
                gamma_approx: decay_rate_approx(&p).map_err(ctx)?,
                n_local: rates.n_local[0],
                n_local_approx: local_noise_approx(&p).unwrap_or(f64::NAN),
            })
        })
        .collect()
}
