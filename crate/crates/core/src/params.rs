//! Physical constants of a single opto-mechanical transducer node.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{field}` is not finite ({value})")]
    NonFinite { field: &'static str, value: f64 },
    #[error("parameter `{field}` must be nonnegative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("total cavity decay kappa_0 + kappa_f must be positive")]
    NoCavityDecay,
    #[error("fiber coupling kappa_f must be positive (eta = kappa_f/kappa in (0, 1])")]
    NoFiberCoupling,
}

/// One node: qubit, mechanical resonator and driven cavity mode.
///
/// All quantities are angular frequencies or rates expressed in one common
/// reference unit (see `scenario::config::Units`); `n_th` is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeParams {
    /// Mechanical frequency.
    pub omega_r: f64,
    /// Mechanical damping rate, `omega_r / Q_m`.
    pub gamma_m: f64,
    /// Thermal occupation of the mechanical bath.
    pub n_th: f64,
    /// Intrinsic cavity loss.
    pub kappa_0: f64,
    /// Cavity decay into the fiber.
    pub kappa_f: f64,
    /// Enhanced opto-mechanical coupling `G = alpha g0`.
    pub g_drive: Complex64,
    /// Effective cavity detuning.
    pub delta_c: f64,
    /// Qubit-resonator coupling.
    pub lambda: f64,
    /// Qubit splitting.
    pub omega_q: f64,
}

impl NodeParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("omega_r", self.omega_r),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
            ("kappa_0", self.kappa_0),
            ("kappa_f", self.kappa_f),
            ("g_drive.re", self.g_drive.re),
            ("g_drive.im", self.g_drive.im),
            ("delta_c", self.delta_c),
            ("lambda", self.lambda),
            ("omega_q", self.omega_q),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { field, value });
            }
        }
        for (field, value) in [
            ("omega_r", self.omega_r),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
            ("kappa_0", self.kappa_0),
            ("kappa_f", self.kappa_f),
            ("lambda", self.lambda),
        ] {
            if value < 0.0 {
                return Err(ParamError::Negative { field, value });
            }
        }
        if self.kappa() <= 0.0 {
            return Err(ParamError::NoCavityDecay);
        }
        if self.kappa_f <= 0.0 {
            return Err(ParamError::NoFiberCoupling);
        }
        Ok(())
    }

    /// Total cavity decay rate.
    pub fn kappa(&self) -> f64 {
        self.kappa_0 + self.kappa_f
    }

    /// Fraction of cavity decay that goes into the fiber.
    pub fn eta(&self) -> f64 {
        self.kappa_f / self.kappa()
    }

    /// Mechanical decoherence rate `gamma_m * n_th`.
    pub fn gamma_th(&self) -> f64 {
        self.gamma_m * self.n_th
    }

    pub fn g_abs(&self) -> f64 {
        self.g_drive.norm()
    }

    /// Node with drive strength `|G| = g` (phase kept) at fixed laser
    /// frequency: the detuning follows `delta_c + 2(|G_ref|^2 - g^2)/omega_r`,
    /// taking `self` as the reference operating point.
    pub fn with_drive_at_fixed_laser(&self, g: f64) -> NodeParams {
        let phase = if self.g_drive.norm() > 0.0 {
            self.g_drive / self.g_drive.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let shift = 2.0 * (self.g_drive.norm_sqr() - g * g) / self.omega_r;
        NodeParams {
            g_drive: phase * g,
            delta_c: self.delta_c + shift,
            ..*self
        }
    }

    /// Node with detuning `delta_c` and unchanged drive.
    pub fn with_detuning(&self, delta_c: f64) -> NodeParams {
        NodeParams { delta_c, ..*self }
    }

    /// Every frequency and rate multiplied by `factor` (occupations untouched).
    pub fn scaled(&self, factor: f64) -> NodeParams {
        NodeParams {
            omega_r: self.omega_r * factor,
            gamma_m: self.gamma_m * factor,
            n_th: self.n_th,
            kappa_0: self.kappa_0 * factor,
            kappa_f: self.kappa_f * factor,
            g_drive: self.g_drive * factor,
            delta_c: self.delta_c * factor,
            lambda: self.lambda * factor,
            omega_q: self.omega_q * factor,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> NodeParams {
        fixtures::fig2_node(1.5)
    }

    #[test]
    fn eta_is_fiber_fraction() {
        let p = NodeParams { kappa_0: 0.25, kappa_f: 0.75, ..base() };
        assert_eq!(p.kappa(), 1.0);
        assert_eq!(p.eta(), 0.75);
    }

    #[test]
    fn rejects_negative_fiber_coupling() {
        let p = NodeParams { kappa_f: -1.0, ..base() };
        assert!(matches!(p.validate(), Err(ParamError::Negative { field: "kappa_f", .. })));
    }

    #[test]
    fn rejects_nan() {
        let p = NodeParams { omega_q: f64::NAN, ..base() };
        assert!(matches!(p.validate(), Err(ParamError::NonFinite { .. })));
    }

    #[test]
    fn fixed_laser_retuning_is_anchored_at_reference() {
        let p = base();
        assert_eq!(p.with_drive_at_fixed_laser(1.5).delta_c, 20.0);
        let q = p.with_drive_at_fixed_laser(0.5);
        assert!((q.delta_c - (20.0 + 2.0 * (2.25 - 0.25) / 20.0)).abs() < 1e-15);
        assert_eq!(q.g_abs(), 0.5);
    }
}
