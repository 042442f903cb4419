//! Mean-field analysis of a three-cavity node: two control cavities `c1`,
//! `c2` driven through a shared fiber in their antisymmetric mode, and a
//! third cavity `c3` tunnel-coupled to their symmetric mode
//! `cs = (c1 + c2)/sqrt 2`. The quantum channel is `(cs + c3)/sqrt 2`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultimodeError {
    #[error("invalid three-cavity parameters: {0}")]
    Input(String),
    #[error("singular drift (undamped resonance), condition estimate {cond:e}")]
    Unstable { cond: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriCavityParams {
    /// Detunings of `c1`, `c2`, `c3`.
    pub delta: [f64; 3],
    /// Tunneling between `c3` and the symmetric mode.
    pub j_tun: f64,
    /// Damping of `c1` and `c2` through the control fiber.
    pub kappa_ctrl: f64,
    /// Complex drive amplitude in the control fiber.
    pub drive: C,
}

impl TriCavityParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.delta.iter().any(|d| !d.is_finite()) {
            return Err("detunings must be finite".into());
        }
        if !(self.j_tun >= 0.0 && self.j_tun.is_finite()) {
            return Err(format!("j_tun must be real and >= 0, got {}", self.j_tun));
        }
        if !(self.kappa_ctrl > 0.0 && self.kappa_ctrl.is_finite()) {
            return Err(format!("kappa_ctrl must be > 0, got {}", self.kappa_ctrl));
        }
        if !(self.drive.re.is_finite() && self.drive.im.is_finite()) {
            return Err("drive must be finite".into());
        }
        Ok(())
    }

    /// Same parameters with `delta[0], delta[1]` moved to `mean +- split/2`.
    pub fn with_split(&self, split: f64) -> Self {
        let mean = 0.5 * (self.delta[0] + self.delta[1]);
        Self { delta: [mean + 0.5 * split, mean - 0.5 * split, self.delta[2]], ..*self }
    }
}

/// Orthonormal map from `(cs, ca, c3)` to `(c1, c2, c3)`: column `k` holds
/// the `(c1, c2, c3)` components of the `k`-th sector mode.
pub fn sector_basis() -> Matrix3<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix3::new(s, s, 0.0, s, -s, 0.0, 0.0, 0.0, 1.0)
}

/// Drift `M` of `d<c>/dt = M <c> + inj` in the `(c1, c2, c3)` basis.
fn drift(p: &TriCavityParams) -> Matrix3<C> {
    let i = C::new(0.0, 1.0);
    let h = {
        let j = p.j_tun * std::f64::consts::FRAC_1_SQRT_2;
        Matrix3::new(
            p.delta[0], 0.0, j, //
            0.0, p.delta[1], j, //
            j, j, p.delta[2],
        )
    };
    let loss = Matrix3::from_diagonal(&Vector3::new(p.kappa_ctrl, p.kappa_ctrl, 0.0));
    h.map(|x| -i * x) - loss.map(|x| C::new(x, 0.0))
}

/// Stationary mean amplitudes `(<c1>, <c2>, <c3>)`.
pub fn steady_amplitudes(p: &TriCavityParams) -> Result<[C; 3], MultimodeError> {
    p.validate().map_err(MultimodeError::Input)?;
    let m = drift(p);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // the fiber couples to ca = (c1 - c2)/sqrt 2
    let inj = Vector3::new(C::new(s, 0.0), C::new(-s, 0.0), C::new(0.0, 0.0))
        * (p.drive * (2.0 * p.kappa_ctrl).sqrt());
    let svd = m.svd(false, false);
    let sv = svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e12) {
        return Err(MultimodeError::Unstable { cond });
    }
    let lu = m.lu();
    let a = lu.solve(&(-inj)).ok_or(MultimodeError::Unstable { cond: f64::INFINITY })?;
    Ok([a[0], a[1], a[2]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMode {
    /// `(c1, c2, c3)` components of `(cs + c3)/sqrt 2`.
    pub vector: [f64; 3],
    /// Projection of the steady amplitudes onto the channel mode.
    pub overlap: C,
    /// `|overlap| / |<c1>|`.
    pub leakage: f64,
}

/// Channel mode and the residual drive it sees.
pub fn effective_channel_mode(p: &TriCavityParams) -> Result<ChannelMode, MultimodeError> {
    let a = steady_amplitudes(p)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vector = [0.5, 0.5, s];
    let overlap: C = vector.iter().zip(&a).map(|(v, x)| x * *v).sum();
    let leakage = if a[0].norm() > 0.0 { overlap.norm() / a[0].norm() } else { 0.0 };
    Ok(ChannelMode { vector, overlap, leakage })
}

/// One row of a detuning-split scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPoint {
    pub split: f64,
    pub amplitudes: [C; 3],
    pub leakage: f64,
}

pub fn split_scan(p: &TriCavityParams, splits: &[f64]) -> Result<Vec<SplitPoint>, MultimodeError> {
    splits
        .iter()
        .map(|&split| {
            let q = p.with_split(split);
            let amplitudes = steady_amplitudes(&q)?;
            let leakage = effective_channel_mode(&q)?.leakage;
            Ok(SplitPoint { split, amplitudes, leakage })
        })
        .collect()
}
