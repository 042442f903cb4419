use num_complex::Complex64;

use super::{PulseError, PulseSchedule};

/// Emitter and receiver amplitudes of the single-excitation state
/// `v1 |10> + v2 |01>` under the lossless cascaded evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkStateTrajectory {
    pub t: Vec<f64>,
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
    /// `|sqrt(G1) v1 + sqrt(G2) v2|^2`, the instantaneous photon loss rate.
    pub defect: Vec<f64>,
    pub norm: Vec<f64>,
}

impl DarkStateTrajectory {
    pub fn residual(&self) -> f64 {
        self.v1.last().map_or(1.0, |v| v.norm_sqr())
    }

    pub fn transferred(&self) -> f64 {
        self.v2.last().map_or(0.0, |v| v.norm_sqr())
    }

    /// Trapezoidal integral of the defect over the trajectory.
    pub fn defect_integral(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.defect.windows(2))
            .map(|(t, d)| 0.5 * (t[1] - t[0]).abs() * (d[0] + d[1]))
            .sum()
    }
}

/// Ideal transfer starting from the emitter excited, `(v1, v2) = (1, 0)`.
pub fn dark_state_ode(schedule: &PulseSchedule) -> Result<DarkStateTrajectory, PulseError> {
    schedule.check_grid()?;
    let traj = dark_state_amplitudes(
        &schedule.grid,
        &schedule.gamma1,
        &schedule.gamma2,
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    )?;
    // the norm can only leak through the defect
    let norm_loss = 1.0 - traj.norm.last().copied().unwrap_or(1.0);
    let bound = 10.0 * traj.defect_integral() + 1e-9;
    if norm_loss > bound {
        return Err(PulseError::Defect { norm_loss, bound });
    }
    Ok(traj)
}

/// RK4 integration of
/// `v1' = -(G1/2) v1`, `v2' = -(G2/2) v2 - sqrt(G1 G2) v1`
/// along `t` (which may run backwards). Rates at step midpoints come from
/// four-point cubic interpolation.
pub fn dark_state_amplitudes(
    t: &[f64],
    gamma1: &[f64],
    gamma2: &[f64],
    v0: [Complex64; 2],
) -> Result<DarkStateTrajectory, PulseError> {
    let n = t.len();
    if n < 2 || gamma1.len() != n || gamma2.len() != n {
        return Err(PulseError::Grid("rates must be sampled on the time grid (>= 2 points)".into()));
    }
    let rhs = |v: [Complex64; 2], g1: f64, g2: f64| {
        [-0.5 * g1 * v[0], -0.5 * g2 * v[1] - (g1 * g2).sqrt() * v[0]]
    };
    let axpy = |v: [Complex64; 2], h: f64, k: [Complex64; 2]| [v[0] + k[0] * h, v[1] + k[1] * h];
    let probe = |v: [Complex64; 2], g1: f64, g2: f64| {
        ((g1.sqrt() * v[0] + g2.sqrt() * v[1]).norm_sqr(), v[0].norm_sqr() + v[1].norm_sqr())
    };

    let mut out = DarkStateTrajectory {
        t: t.to_vec(),
        v1: Vec::with_capacity(n),
        v2: Vec::with_capacity(n),
        defect: Vec::with_capacity(n),
        norm: Vec::with_capacity(n),
    };
    let mut v = v0;
    for k in 0..n {
        let (d, nrm) = probe(v, gamma1[k], gamma2[k]);
        out.v1.push(v[0]);
        out.v2.push(v[1]);
        out.defect.push(d);
        out.norm.push(nrm);
        if k + 1 == n {
            break;
        }
        let h = t[k + 1] - t[k];
        let (a1, b1) = (gamma1[k], gamma2[k]);
        let (a3, b3) = (gamma1[k + 1], gamma2[k + 1]);
        let a2 = midpoint(gamma1, k);
        let b2 = midpoint(gamma2, k);
        let k1 = rhs(v, a1, b1);
        let k2 = rhs(axpy(v, h / 2.0, k1), a2, b2);
        let k3 = rhs(axpy(v, h / 2.0, k2), a2, b2);
        let k4 = rhs(axpy(v, h, k3), a3, b3);
        for c in 0..2 {
            v[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
    }
    Ok(out)
}

/// Value halfway between samples `k` and `k + 1`, cubic where four
/// neighbours exist, clamped to be nonnegative.
pub(crate) fn midpoint(f: &[f64], k: usize) -> f64 {
    let n = f.len();
    let m = if k >= 1 && k + 2 < n {
        (-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0
    } else {
        0.5 * (f[k] + f[k + 1])
    };
    m.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{PulseSchedule, PulseSpec};
    use std::f64::consts::PI;

    fn uniform(tf: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| tf * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn frozen_without_rates() {
        let t = uniform(5.0, 11);
        let z = vec![0.0; 11];
        let traj = dark_state_ode(&PulseSchedule::from_rates(t, z.clone(), z)).unwrap();
        assert!(traj.v1.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(traj.v2.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn constant_rates_closed_form() {
        let g = 0.7;
        let t = uniform(12.0, 2001);
        let r = vec![g; t.len()];
        let traj = dark_state_ode(&PulseSchedule::from_rates(t.clone(), r.clone(), r)).unwrap();
        for (k, &tk) in t.iter().enumerate() {
            let exact = -g * tk * (-g * tk / 2.0).exp();
            assert!((traj.v2[k].re - exact).abs() < 1e-10);
            assert!((traj.v1[k].re - (-g * tk / 2.0).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn erf_pulse_residual_matches_asymptote() {
        let g0 = 1.0;
        let a: f64 = 0.98;
        let spec = PulseSpec { gamma0: g0, c_shape: PI * g0 * g0 / (4.0 * a * a), t_f: 40.0, gamma_floor: 0.0 };
        let traj = dark_state_ode(&PulseSchedule::sample(&spec, 4001).unwrap()).unwrap();
        // long pulse: only the asymptotic residual survives
        assert!((traj.residual() / spec.residual_limit() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn backward_integration_restores_emitter() {
        let g0 = 1.0;
        let spec = PulseSpec { gamma0: g0, c_shape: PI / (4.0 * 0.95f64.powi(2)), t_f: 16.0, gamma_floor: 0.0 };
        let sched = PulseSchedule::sample(&spec, 2001).unwrap();
        let fwd = dark_state_ode(&sched).unwrap();
        let rev_t: Vec<f64> = sched.grid.iter().rev().copied().collect();
        let rev1: Vec<f64> = sched.gamma1.iter().rev().copied().collect();
        let rev2: Vec<f64> = sched.gamma2.iter().rev().copied().collect();
        let end = [*fwd.v1.last().unwrap(), *fwd.v2.last().unwrap()];
        let back = dark_state_amplitudes(&rev_t, &rev1, &rev2, end).unwrap();
        assert!((back.v1.last().unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(back.v2.last().unwrap().norm() < 1e-8);
    }

    #[test]
    fn mirrored_network_gives_same_residual() {
        let spec = PulseSpec { gamma0: 1.0, c_shape: PI / (4.0 * 0.9f64.powi(2)), t_f: 14.0, gamma_floor: 0.0 };
        let sched = PulseSchedule::sample(&spec, 1001).unwrap();
        let a = dark_state_ode(&sched).unwrap().residual();
        let b = dark_state_ode(&sched.mirrored()).unwrap().residual();
        assert!((a - b).abs() < 1e-14);
    }
}
