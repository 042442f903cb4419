use serde::{Deserialize, Serialize};

use super::PulseError;
use crate::netlin::{decay_rate_approx, LinearNetworkModel, NetError};
use crate::params::NodeParams;

/// Which control parameter shapes the decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Vary the drive strength `|G|` at fixed laser frequency; the
    /// detuning follows the power-dependent cavity shift.
    #[default]
    Strength,
    /// Vary the cavity detuning at fixed `|G|`.
    Detuning,
}

/// Operating point of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePoint {
    pub g: f64,
    pub delta_c: f64,
}

impl DrivePoint {
    pub fn apply(&self, reference: &NodeParams) -> NodeParams {
        NodeParams {
            g_drive: num_complex::Complex64::new(self.g, 0.0),
            delta_c: self.delta_c,
            ..*reference
        }
    }
}

/// Qubit decay rate of a single node from the exact linear spectrum.
pub fn exact_decay_rate(p: &NodeParams) -> Result<f64, NetError> {
    let model = LinearNetworkModel::new_unchecked(std::slice::from_ref(p))?;
    Ok(2.0 * model.spectrum(p.omega_q)?[(0, 0)].re)
}

/// Rate of the switched-off node relative to the largest achievable rate.
pub const OFF_RATIO: f64 = 1e-6;

struct Branches {
    lo: f64,
    hi: f64,
    peak_x: f64,
    peak_rate: f64,
}

fn node_at(reference: &NodeParams, control: Control, x: f64) -> NodeParams {
    match control {
        Control::Strength => reference.with_drive_at_fixed_laser(x),
        Control::Detuning => reference.with_detuning(x),
    }
}

fn search_interval(p: &NodeParams, control: Control) -> Result<(f64, f64), PulseError> {
    match control {
        Control::Strength => {
            let scale = p.g_abs().max(p.kappa());
            let positive_detuning = (p.g_drive.norm_sqr() + p.delta_c * p.omega_r / 2.0).max(0.0).sqrt();
            let hi = 0.999 * positive_detuning.min(p.omega_r / 2.0);
            let lo = 1e-6 * scale;
            if !(hi > lo) {
                return Err(PulseError::Input(format!(
                    "no admissible drive range (upper limit {hi:e})"
                )));
            }
            Ok((lo, hi))
        }
        Control::Detuning => {
            if p.g_abs() == 0.0 {
                return Err(PulseError::Input("detuning control needs a nonzero drive".into()));
            }
            let width = 50.0 * (p.kappa() + p.g_abs() + (p.omega_q - p.omega_r).abs());
            let lo = (p.omega_q - width).max(1e-3 * p.omega_q.abs().max(p.kappa()));
            Ok((lo, p.omega_q + width))
        }
    }
}

fn locate_peak<F>(rate: &F, lo: f64, hi: f64, log_scan: bool) -> Result<Branches, PulseError>
where
    F: Fn(f64) -> Result<f64, PulseError>,
{
    const SCAN: usize = 400;
    let at = |k: usize| {
        let s = k as f64 / SCAN as f64;
        if log_scan {
            lo * (hi / lo).powf(s)
        } else {
            lo + (hi - lo) * s
        }
    };
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..=SCAN {
        let r = rate(at(k))?;
        if r > best.1 {
            best = (k, r);
        }
    }
    // golden-section refinement between the scan neighbours
    let (mut a, mut b) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(SCAN)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (rate(x1)?, rate(x2)?);
    for _ in 0..100 {
        if (b - a).abs() <= 1e-13 * b.abs().max(1e-300) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = rate(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = rate(x1)?;
        }
    }
    let (peak_x, peak_rate) = if f1 > best.1 || f2 > best.1 {
        if f1 > f2 { (x1, f1) } else { (x2, f2) }
    } else {
        (at(best.0), best.1)
    };
    Ok(Branches { lo, hi, peak_x, peak_rate })
}

fn solve_on_branch<F>(rate: &F, br: &Branches, target: f64, hint: f64) -> Result<f64, PulseError>
where
    F: Fn(f64) -> Result<f64, PulseError>,
{
    if !(target.is_finite() && target >= 0.0) {
        return Err(PulseError::Input(format!("target rate {target} is not a nonnegative number")));
    }
    if target > br.peak_rate {
        return Err(PulseError::Saturation { target, max: br.peak_rate });
    }
    let far = if hint <= br.peak_x { br.lo } else { br.hi };
    if rate(far)? >= target {
        // below the smallest representable rate on this branch
        return Ok(far);
    }
    // rate(a) < target <= rate(b)
    let (mut a, mut b) = (far, br.peak_x);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if rate(m)? < target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Inverts the decay rate of one node along a fixed branch. The branch
/// search is done once, so repeated solves are cheap.
pub struct RateInverter {
    params: NodeParams,
    control: Control,
    exact: bool,
    branches: Branches,
}

impl RateInverter {
    pub fn new(params: &NodeParams, control: Control, exact: bool) -> Result<Self, PulseError> {
        params.validate().map_err(|source| NetError::InvalidParams { node: 0, source })?;
        let (lo, hi) = search_interval(params, control)?;
        let p = *params;
        let rate = |x| rate_at(&p, control, exact, x);
        let mut branches = locate_peak(&rate, lo, hi, control == Control::Strength)?;
        // the off state is where the rate drops to OFF_RATIO of its peak;
        // switching further off only makes the linear model ill-conditioned
        let floor = OFF_RATIO * branches.peak_rate;
        let off_side = match control {
            Control::Strength => branches.lo,
            Control::Detuning => branches.hi,
        };
        if rate(off_side)? < floor {
            let (mut a, mut b) = (off_side, branches.peak_x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if rate(m)? < floor {
                    a = m;
                } else {
                    b = m;
                }
            }
            match control {
                Control::Strength => branches.lo = b,
                Control::Detuning => branches.hi = b,
            }
        }
        Ok(Self { params: p, control, exact, branches })
    }

    pub fn rate(&self, x: f64) -> Result<f64, PulseError> {
        rate_at(&self.params, self.control, self.exact, x)
    }

    /// Control value and rate at the branch maximum.
    pub fn peak(&self) -> (f64, f64) {
        (self.branches.peak_x, self.branches.peak_rate)
    }

    /// Control value at which the node is switched off.
    pub fn off_value(&self) -> f64 {
        match self.control {
            Control::Strength => self.branches.lo,
            Control::Detuning => self.branches.hi,
        }
    }

    pub fn solve(&self, target: f64, hint: f64) -> Result<DrivePoint, PulseError> {
        let x = solve_on_branch(&|x| self.rate(x), &self.branches, target, hint)?;
        let p = node_at(&self.params, self.control, x);
        Ok(DrivePoint { g: p.g_abs(), delta_c: p.delta_c })
    }

    /// Control value of a drive point.
    pub fn control_of(&self, d: &DrivePoint) -> f64 {
        match self.control {
            Control::Strength => d.g,
            Control::Detuning => d.delta_c,
        }
    }
}

fn rate_at(p: &NodeParams, control: Control, exact: bool, x: f64) -> Result<f64, PulseError> {
    let node = node_at(p, control, x);
    Ok(if exact { exact_decay_rate(&node)? } else { decay_rate_approx(&node)? })
}

/// Operating point whose rotating-wave decay rate equals `target`.
///
/// `params` is the reference operating point; the branch (below or above
/// the rate maximum) is the one containing `hint`, a previous value of the
/// control parameter (`|G|` or the detuning).
pub fn invert_rate_to_drive(
    target: f64,
    params: &NodeParams,
    hint: f64,
    control: Control,
) -> Result<DrivePoint, PulseError> {
    RateInverter::new(params, control, false)?.solve(target, hint)
}

/// As [`invert_rate_to_drive`], matching the exact single-node spectrum.
pub fn invert_rate_exact(
    target: f64,
    params: &NodeParams,
    hint: f64,
    control: Control,
) -> Result<DrivePoint, PulseError> {
    RateInverter::new(params, control, true)?.solve(target, hint)
}

/// Control value and rate at the maximum of the achievable decay rate.
pub fn rate_branch_peak(
    params: &NodeParams,
    control: Control,
    exact: bool,
) -> Result<(f64, f64), PulseError> {
    Ok(RateInverter::new(params, control, exact)?.peak())
}
