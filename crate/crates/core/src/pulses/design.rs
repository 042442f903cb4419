use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::invert::RateInverter;
use super::{dark_state_ode, Control, PulseError, PulseSchedule, PulseSpec};
use crate::params::NodeParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignOptions {
    /// Samples per schedule.
    pub grid: usize,
    /// Pulse peak as a fraction of the largest achievable rate.
    pub peak_fraction: f64,
    pub control: Control,
    /// Longest admissible duration in units of `1/gamma0`.
    pub max_duration: f64,
    /// Optional bound on the dark-state defect relative to the peak rate.
    /// When set, the pulse amplitude is chosen among a few candidates so
    /// that the bound holds along the whole trajectory.
    pub defect_tolerance: Option<f64>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { grid: 2001, peak_fraction: 0.8, control: Control::Strength, max_duration: 100.0, defect_tolerance: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferDesign {
    pub spec: PulseSpec,
    pub schedule: PulseSchedule,
    /// `|v1(t_f)|^2` of the ideal amplitudes.
    pub residual: f64,
    /// `|v2(t_f)|^2` of the ideal amplitudes.
    pub transferred: f64,
    /// Phase of `v2(t_f)`, undone by the receiver.
    pub v2_phase: f64,
    /// Largest rate both nodes can reach.
    pub gamma_max: f64,
}

/// Peak of `exp(-u^2) / (1 - a erf(u))` over `u`, i.e. the pulse maximum in
/// units of `gamma0`.
pub(crate) fn peak_ratio(a: f64) -> f64 {
    let f = |u: f64| (-u * u).exp() / (1.0 - a * libm::erf(u));
    let (mut lo, mut hi) = (0.0, 6.0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    f(0.5 * (lo + hi))
}

/// Designs emitter/receiver pulses for the chain `p1 -> p2` leaving at most
/// `residual_target` population in the emitter, then maps them to drives.
///
/// The pulse amplitude `a = gamma0 sqrt(pi/4c)` is chosen so that the
/// asymptotic residual `(1-a)/(1+a)` is half the target (or smaller, when a
/// defect bound is requested); the duration is the shortest one meeting
/// the target. The pulse peak sits at `peak_fraction` of the largest rate
/// both nodes can reach, and drives are found by inverting the exact
/// single-node rate.
pub fn design_transfer(
    p1: &NodeParams,
    p2: &NodeParams,
    residual_target: f64,
    opts: &DesignOptions,
) -> Result<TransferDesign, PulseError> {
    if !(residual_target > 0.0 && residual_target < 1.0) {
        return Err(PulseError::Input(format!("residual target {residual_target} outside (0, 1)")));
    }
    if !(opts.peak_fraction > 0.0 && opts.peak_fraction < 1.0) {
        return Err(PulseError::Input(format!("peak fraction {} outside (0, 1)", opts.peak_fraction)));
    }
    if opts.grid < 3 {
        return Err(PulseError::Grid(format!("need at least 3 samples, got {}", opts.grid)));
    }
    let inv1 = RateInverter::new(p1, opts.control, true)?;
    let inv2 = RateInverter::new(p2, opts.control, true)?;
    let gamma_max = inv1.peak().1.min(inv2.peak().1);
    let floor = inv1.rate(inv1.off_value())?.max(inv2.rate(inv2.off_value())?);

    let fractions: &[f64] = match opts.defect_tolerance {
        None => &[0.5],
        Some(_) => &[0.5, 0.2, 0.1, 0.05, 0.02],
    };
    let mut chosen: Option<PulseSpec> = None;
    let mut last_err = None;
    for &fraction in fractions {
        // asymptotic residual (1-a)/(1+a) set to a fraction of the target
        let q = residual_target * fraction;
        let a = (1.0 - q) / (1.0 + q);
        let gamma0 = opts.peak_fraction * gamma_max / peak_ratio(a);
        let c_shape = PI * gamma0 * gamma0 / (4.0 * a * a);
        let base = PulseSpec { gamma0, c_shape, t_f: 1.0, gamma_floor: floor };
        match shortest_duration(&base, residual_target, opts) {
            Ok(spec) => {
                if chosen.map_or(true, |c| spec.t_f < c.t_f) {
                    chosen = Some(spec);
                }
            }
            Err(e @ PulseError::Unreachable { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let spec = match (chosen, last_err) {
        (Some(spec), _) => spec,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one candidate amplitude is tried"),
    };

    finish(&inv1, &inv2, spec, gamma_max, opts.grid)
}

/// Maps a given pulse onto drives for the chain `p1 -> p2`.
pub fn design_from_spec(
    p1: &NodeParams,
    p2: &NodeParams,
    spec: &PulseSpec,
    opts: &DesignOptions,
) -> Result<TransferDesign, PulseError> {
    spec.validate()?;
    let inv1 = RateInverter::new(p1, opts.control, true)?;
    let inv2 = RateInverter::new(p2, opts.control, true)?;
    let gamma_max = inv1.peak().1.min(inv2.peak().1);
    let floor = inv1.rate(inv1.off_value())?.max(inv2.rate(inv2.off_value())?);
    let spec = PulseSpec { gamma_floor: spec.gamma_floor.max(floor), ..*spec };
    finish(&inv1, &inv2, spec, gamma_max, opts.grid)
}

fn finish(
    inv1: &RateInverter,
    inv2: &RateInverter,
    spec: PulseSpec,
    gamma_max: f64,
    grid: usize,
) -> Result<TransferDesign, PulseError> {
    let mut schedule = PulseSchedule::sample(&spec, grid)?;
    let traj = dark_state_ode(&schedule)?;
    for (inv, rates, g, dc) in [
        (inv1, &schedule.gamma1, &mut schedule.g1, &mut schedule.delta_c1),
        (inv2, &schedule.gamma2, &mut schedule.g2, &mut schedule.delta_c2),
    ] {
        let mut hint = inv.off_value();
        for &target in rates.iter() {
            let d = inv.solve(target, hint)?;
            hint = inv.control_of(&d);
            g.push(d.g);
            dc.push(d.delta_c);
        }
    }
    Ok(TransferDesign {
        spec,
        residual: traj.residual(),
        transferred: traj.transferred(),
        v2_phase: traj.v2.last().map_or(0.0, |v| v.arg()),
        schedule,
        gamma_max,
    })
}

/// Shortest `t_f` for which the sampled pulse meets the residual target
/// (and the defect bound, if any), by growth then bisection.
fn shortest_duration(
    base: &PulseSpec,
    residual_target: f64,
    opts: &DesignOptions,
) -> Result<PulseSpec, PulseError> {
    let spec_for = |t_f: f64| PulseSpec { t_f, ..*base };
    let check = |t_f: f64| -> Result<(bool, f64), PulseError> {
        let sched = PulseSchedule::sample(&spec_for(t_f), opts.grid)?;
        let traj = dark_state_ode(&sched)?;
        let r = traj.residual();
        let mut ok = r <= residual_target;
        if let Some(tol) = opts.defect_tolerance {
            let peak = sched.gamma1.iter().cloned().fold(0.0, f64::max);
            ok &= traj.defect.iter().all(|&d| d <= tol * peak);
        }
        Ok((ok, r))
    };
    let gamma0 = base.gamma0;
    let t_max = opts.max_duration / gamma0;
    let mut fail = 0.0;
    let mut ok = 4.0 / gamma0;
    let mut best = f64::INFINITY;
    loop {
        let (pass, r) = check(ok)?;
        best = best.min(r);
        if pass {
            break;
        }
        fail = ok;
        ok *= 1.25;
        if ok > t_max {
            let (pass, r) = check(t_max)?;
            if pass {
                ok = t_max;
                break;
            }
            return Err(PulseError::Unreachable { target: residual_target, t_max, best: best.min(r) });
        }
    }
    for _ in 0..60 {
        if ok - fail <= 1e-10 * ok {
            break;
        }
        let mid = 0.5 * (ok + fail);
        if check(mid)?.0 {
            ok = mid;
        } else {
            fail = mid;
        }
    }
    Ok(spec_for(ok))
}
