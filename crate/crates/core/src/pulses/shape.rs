use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::PulseError;

/// Erf-shaped emission pulse
/// `G1(s) = g0 exp(-c s^2) / (1 - g0 sqrt(pi/4c) erf(sqrt(c) s))`, `s = t - t_f/2`.
/// The receiving pulse is its mirror image, `G2(t) = G1(t_f - t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub gamma0: f64,
    pub c_shape: f64,
    pub t_f: f64,
    pub gamma_floor: f64,
}

impl PulseSpec {
    /// Lower bound on `c_shape` that keeps the denominator positive.
    pub fn shape_bound(&self) -> f64 {
        PI * self.gamma0 * self.gamma0 / 4.0
    }

    /// `g0 sqrt(pi/4c)`; below one for an admissible pulse.
    pub fn amplitude(&self) -> f64 {
        self.gamma0 * (PI / (4.0 * self.c_shape)).sqrt()
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.c_shape > self.shape_bound()) {
            return Err(PulseError::Shape { c: self.c_shape, bound: self.shape_bound() });
        }
        if !(self.gamma0 > 0.0 && self.t_f > 0.0 && self.gamma_floor >= 0.0) {
            return Err(PulseError::Input(format!(
                "gamma0, t_f must be positive and gamma_floor nonnegative ({self:?})"
            )));
        }
        Ok(())
    }

    /// Asymptotic emitter population left behind by the infinitely long
    /// pulse, `(1 - a)/(1 + a)` with `a = amplitude()`.
    pub fn residual_limit(&self) -> f64 {
        let a = self.amplitude();
        (1.0 - a) / (1.0 + a)
    }

    pub fn gamma1(&self, t: f64) -> Result<f64, PulseError> {
        gamma_pulse(self, t)
    }

    pub fn gamma2(&self, t: f64) -> Result<f64, PulseError> {
        gamma_pulse(self, self.t_f - t)
    }
}

/// Emitter rate at time `t`, clamped from below at `gamma_floor`.
pub fn gamma_pulse(spec: &PulseSpec, t: f64) -> Result<f64, PulseError> {
    spec.validate()?;
    let s = t - spec.t_f / 2.0;
    let den = 1.0 - spec.amplitude() * libm::erf(spec.c_shape.sqrt() * s);
    if !(den > 0.0) {
        return Err(PulseError::Shape { c: spec.c_shape, bound: spec.shape_bound() });
    }
    let g = spec.gamma0 * (-spec.c_shape * s * s).exp() / den;
    Ok(g.max(spec.gamma_floor))
}

/// Sampled control trajectories for both nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub grid: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    /// Drive strengths (real, nonnegative).
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub delta_c1: Vec<f64>,
    pub delta_c2: Vec<f64>,
}

impl PulseSchedule {
    /// Rates only; drives are left empty.
    pub fn from_rates(grid: Vec<f64>, gamma1: Vec<f64>, gamma2: Vec<f64>) -> Self {
        Self { grid, gamma1, gamma2, g1: vec![], g2: vec![], delta_c1: vec![], delta_c2: vec![] }
    }

    /// Samples `spec` on a uniform grid of `n` points over `[0, t_f]`.
    pub fn sample(spec: &PulseSpec, n: usize) -> Result<Self, PulseError> {
        if n < 2 {
            return Err(PulseError::Grid(format!("need at least 2 samples, got {n}")));
        }
        let grid: Vec<f64> = (0..n).map(|k| spec.t_f * k as f64 / (n - 1) as f64).collect();
        let gamma1 = grid.iter().map(|&t| gamma_pulse(spec, t)).collect::<Result<Vec<_>, _>>()?;
        let gamma2 = gamma1.iter().rev().copied().collect();
        Ok(Self::from_rates(grid, gamma1, gamma2))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.grid.last().copied().unwrap_or(0.0) - self.grid.first().copied().unwrap_or(0.0)
    }

    /// Same schedule with node roles exchanged and time reversed.
    pub fn mirrored(&self) -> Self {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        let t0 = self.grid.first().copied().unwrap_or(0.0);
        let t1 = self.grid.last().copied().unwrap_or(0.0);
        Self {
            grid: self.grid.iter().rev().map(|t| t0 + t1 - t).collect(),
            gamma1: rev(&self.gamma2),
            gamma2: rev(&self.gamma1),
            g1: rev(&self.g2),
            g2: rev(&self.g1),
            delta_c1: rev(&self.delta_c2),
            delta_c2: rev(&self.delta_c1),
        }
    }

    pub(crate) fn check_grid(&self) -> Result<(), PulseError> {
        let n = self.grid.len();
        if n < 2 {
            return Err(PulseError::Grid(format!("need at least 2 samples, got {n}")));
        }
        if self.gamma1.len() != n || self.gamma2.len() != n {
            return Err(PulseError::Grid("rate arrays do not match the grid".into()));
        }
        if !self.grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(PulseError::Grid("time samples must increase".into()));
        }
        Ok(())
    }
}
