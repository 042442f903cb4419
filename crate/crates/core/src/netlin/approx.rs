//! Closed-form approximations of the exact network quantities.

use super::NetError;
use crate::params::NodeParams;

/// Rotating-wave estimate of the qubit decay rate through one node:
/// `(lambda^2/2) kappa |G|^2 / [(|G|^2 + (dc - wq)(wq - wr))^2 + kappa^2 (wq - wr)^2]`.
pub fn decay_rate_approx(p: &NodeParams) -> Result<f64, NetError> {
    let g2 = p.g_drive.norm_sqr();
    let kappa = p.kappa();
    let dq = p.omega_q - p.omega_r;
    let re = g2 + (p.delta_c - p.omega_q) * dq;
    let den = re * re + kappa * kappa * dq * dq;
    if den == 0.0 || !den.is_finite() {
        return Err(NetError::Pole);
    }
    Ok(0.5 * p.lambda * p.lambda * kappa * g2 / den)
}

/// Local noise occupation of one node: thermal leakage through the cavity
/// plus the Stokes (counter-rotating) floor.
pub fn local_noise_approx(p: &NodeParams) -> Result<f64, NetError> {
    let g2 = p.g_drive.norm_sqr();
    if g2 == 0.0 {
        return Err(NetError::Divergence);
    }
    if p.delta_c * p.omega_q <= 0.0 {
        return Err(NetError::StokesSign);
    }
    let kappa = p.kappa();
    let lorentz = kappa * kappa + (p.delta_c - p.omega_q).powi(2);
    let thermal = p.gamma_th() / (2.0 * kappa) * lorentz / g2;
    let stokes = lorentz / (4.0 * p.delta_c * p.omega_q);
    Ok(thermal + stokes)
}

/// Normal-mode frequencies `(w+, w-) = sqrt(wr^2 +- 2|G| wr)` of the
/// hybridized mechanics and cavity.
pub fn normal_mode_frequencies(p: &NodeParams) -> Result<(f64, f64), NetError> {
    let g = p.g_abs();
    if 2.0 * g >= p.omega_r {
        return Err(NetError::ImaginaryBranch { g, omega_r: p.omega_r });
    }
    let wr = p.omega_r;
    Ok(((wr * wr + 2.0 * g * wr).sqrt(), (wr * wr - 2.0 * g * wr).sqrt()))
}

/// Cooling-rate estimate `min(|G|^2 kappa / (kappa^2 + (dc - wr)^2), kappa/2)`.
pub fn cooling_rate_approx(p: &NodeParams) -> f64 {
    let kappa = p.kappa();
    let weak = p.g_drive.norm_sqr() * kappa / (kappa * kappa + (p.delta_c - p.omega_r).powi(2));
    weak.min(kappa / 2.0)
}
