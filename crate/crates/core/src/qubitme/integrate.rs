use num_complex::Complex64;

use super::generator::CompiledGenerator;
use super::state::{HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
use super::{GeneratorSlice, MeError, TwoQubitState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Upper bound on `h * max rate` for each RK4 step.
    pub max_step_product: f64,
    /// Minimum number of RK4 steps per grid interval.
    pub min_substeps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { max_step_product: 0.05, min_substeps: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<TwoQubitState>,
}

impl Trajectory {
    pub fn last(&self) -> &TwoQubitState {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Four-point Lagrange interpolation between samples `k` and `k+1` at
/// fraction `s`, falling back to linear at the ends of the grid.
fn interp(f: impl Fn(usize) -> f64, n: usize, k: usize, s: f64) -> f64 {
    if k >= 1 && k + 2 < n {
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        w[0] * f(k - 1) + w[1] * f(k) + w[2] * f(k + 1) + w[3] * f(k + 2)
    } else {
        (1.0 - s) * f(k) + s * f(k + 1)
    }
}

fn slice_at(slices: &[GeneratorSlice], k: usize, s: f64) -> GeneratorSlice {
    if s == 0.0 {
        return slices[k].clone();
    }
    if s == 1.0 {
        return slices[k + 1].clone();
    }
    let n = slices.len();
    let mut out = slices[k].clone();
    let r = &mut out.rates;
    for q in 0..r.gamma.len() {
        r.gamma[q] = interp(|i| slices[i].rates.gamma[q], n, k, s).max(0.0);
        r.n_occ[q] = interp(|i| slices[i].rates.n_occ[q], n, k, s).max(0.0);
        r.eta[q] = interp(|i| slices[i].rates.eta[q], n, k, s).clamp(f64::MIN_POSITIVE, 1.0);
    }
    r.j12 = interp(|i| slices[i].rates.j12, n, k, s).max(0.0);
    out.delta = interp(|i| slices[i].delta, n, k, s);
    out
}

/// Fixed-step RK4 integration of the master equation along `grid`, with
/// generator parameters sampled at the grid points. States are reported
/// at every grid point and checked against the density-matrix invariants.
pub fn integrate(
    initial: &TwoQubitState,
    grid: &[f64],
    slices: &[GeneratorSlice],
    opts: &IntegrateOptions,
) -> Result<Trajectory, MeError> {
    let n = grid.len();
    if n < 2 || slices.len() != n {
        return Err(MeError::Grid(format!(
            "{} grid points and {} slices (need matching, >= 2)",
            n,
            slices.len()
        )));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(MeError::Grid("time samples must increase".into()));
    }
    for sl in slices {
        sl.validate()?;
    }
    initial.check(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;

    let mut rho = *initial.rho();
    let mut states = Vec::with_capacity(n);
    states.push(initial.clone());
    let half = Complex64::new(0.5, 0.0);
    for k in 0..n - 1 {
        let h_grid = grid[k + 1] - grid[k];
        let rate = slices[k].max_rate().max(slices[k + 1].max_rate());
        let m = ((h_grid * rate / opts.max_step_product).ceil() as usize).max(opts.min_substeps).max(1);
        let h = h_grid / m as f64;
        let hc = Complex64::new(h, 0.0);
        let mut prev = CompiledGenerator::new(&slices[k]);
        for j in 0..m {
            let s0 = j as f64 / m as f64;
            let s1 = (j + 1) as f64 / m as f64;
            let mid = CompiledGenerator::new(&slice_at(slices, k, 0.5 * (s0 + s1)));
            let end = CompiledGenerator::new(&slice_at(slices, k, s1));
            let k1 = prev.apply(&rho);
            let k2 = mid.apply(&(rho + k1 * hc * half));
            let k3 = mid.apply(&(rho + k2 * hc * half));
            let k4 = end.apply(&(rho + k3 * hc));
            let two = Complex64::new(2.0, 0.0);
            rho += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
            prev = end;
        }
        // keep exact Hermiticity; the generator preserves it analytically
        rho = (rho + rho.adjoint()) * half;
        let state = TwoQubitState::new_unchecked(rho);
        if let Err(e) = state.check(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL) {
            return Err(MeError::StepSize {
                t: grid[k + 1],
                step: k + 1,
                detail: format!("{e} with {m} substeps of h = {h:e}, max rate {rate:e}"),
            });
        }
        states.push(state);
    }
    Ok(Trajectory { t: grid.to_vec(), states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlin::EffectiveRates;
    use nalgebra::Matrix4;

    fn max_abs_diff(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn constant(gamma: f64, eta: f64, n: f64, t2: f64) -> GeneratorSlice {
        let mut r = EffectiveRates::idle(2);
        r.gamma = vec![gamma; 2];
        r.j12 = eta * gamma;
        r.n_occ = vec![n; 2];
        r.eta = vec![eta; 2];
        GeneratorSlice::new(r, [t2; 2])
    }

    fn uniform(tf: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| tf * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_rate_cascade_closed_form() {
        let g = 0.5;
        let grid = uniform(10.0, 401);
        let slices = vec![constant(g, 1.0, 0.0, f64::INFINITY); grid.len()];
        let traj = integrate(&TwoQubitState::basis(1, 0), &grid, &slices, &Default::default()).unwrap();
        for (t, s) in traj.t.iter().zip(&traj.states) {
            // v2 = -G t exp(-G t / 2)
            let p2 = (g * t).powi(2) * (-g * t).exp();
            assert!((s.population(0, 1) - p2).abs() < 1e-8);
            assert!((s.population(1, 0) - (-g * t).exp()).abs() < 1e-8);
            assert!(s.population(1, 1).abs() < 1e-12);
        }
        // peak 4/e^2 at t = 2/G
        let k = traj.states.iter().enumerate().max_by(|a, b| a.1.population(0, 1).total_cmp(&b.1.population(0, 1))).unwrap().0;
        assert!((traj.t[k] - 2.0 / g).abs() < 0.03);
        assert!((traj.states[k].population(0, 1) - 4.0 * (-2.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn single_emitter_exponential_decay() {
        let mut sl = constant(0.8, 1.0, 0.0, f64::INFINITY);
        sl.rates.gamma[1] = 0.0;
        sl.rates.j12 = 0.0;
        let grid = uniform(5.0, 201);
        let traj = integrate(&TwoQubitState::basis(1, 0), &grid, &vec![sl; 201], &Default::default()).unwrap();
        for (t, s) in traj.t.iter().zip(&traj.states) {
            assert!((s.population(1, 0) - (-0.8 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn dephasing_is_exponential() {
        let plus = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let s0 = TwoQubitState::product(plus, plus).unwrap();
        let t2 = 3.0;
        let grid = uniform(6.0, 301);
        let sl = constant(0.0, 1.0, 0.0, t2);
        let traj = integrate(&s0, &grid, &vec![sl; 301], &Default::default()).unwrap();
        for (t, s) in traj.t.iter().zip(&traj.states) {
            // single-qubit coherence of qubit 2 and of qubit 1
            let c2 = s.rho()[(0, 1)].norm() / 0.25;
            let c1 = s.rho()[(0, 2)].norm() / 0.25;
            assert!((c2 - (-t / t2).exp()).abs() < 1e-9);
            assert!((c1 - (-t / t2).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn lossy_excitation_is_monotone() {
        let grid = uniform(10.0, 301);
        let slices = vec![constant(0.6, 0.7, 0.0, f64::INFINITY); 301];
        let traj = integrate(&TwoQubitState::basis(1, 0), &grid, &slices, &Default::default()).unwrap();
        let ex: Vec<f64> = traj.states.iter().map(|s| s.excitation()).collect();
        assert!(ex.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn step_halving_converges() {
        let grid = uniform(8.0, 201);
        let slices: Vec<_> = grid
            .iter()
            .map(|t| {
                let mut s = constant(0.3 + 0.2 * (t / 2.0).sin(), 0.9, 0.05, 20.0);
                s.rates.j12 = 0.8 * s.rates.gamma[0];
                s
            })
            .collect();
        let a = integrate(&TwoQubitState::basis(1, 0), &grid, &slices, &Default::default()).unwrap();
        let opts = IntegrateOptions { min_substeps: 2, ..Default::default() };
        let b = integrate(&TwoQubitState::basis(1, 0), &grid, &slices, &opts).unwrap();
        assert!(max_abs_diff(a.last().rho(), b.last().rho()) < 1e-6);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = uniform(1.0, 5);
        let slices = vec![constant(0.1, 1.0, 0.0, 1.0); 4];
        assert!(matches!(
            integrate(&TwoQubitState::basis(1, 0), &grid, &slices, &Default::default()),
            Err(MeError::Grid(_))
        ));
    }
}
