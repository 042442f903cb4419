use serde::{Deserialize, Serialize};

use super::fock::{check_convergence, default_step, evolve, FockNode, OracleInitial, OracleTrajectory};
use super::OracleError;
use crate::netlin::build_network;
use crate::params::NodeParams;

/// Fits below this R² are flagged as non-exponential.
const MIN_R_SQUARED: f64 = 0.99;
const MAX_STEP_DIFF: f64 = 1e-5;

/// Oracle run settings, as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    pub n_mech: usize,
    pub n_cav: usize,
    /// When set, the qubit coupling is replaced by this multiple of the
    /// node's exact cooling rate.
    pub lambda_over_gamma_op: Option<f64>,
    /// Integration step; default from [`default_step`].
    pub dt: Option<f64>,
    pub samples: usize,
    /// Fit window in units of `1/Gamma` from the linear model.
    pub window: [f64; 2],
    /// Length of the step-halving check, in units of `1/kappa`.
    pub convergence_window: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            n_mech: 10,
            n_cav: 10,
            lambda_over_gamma_op: Some(0.1),
            dt: None,
            samples: 300,
            window: [0.5, 3.0],
            convergence_window: 20.0,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(2..=12).contains(&self.n_mech) || !(2..=12).contains(&self.n_cav) {
            return Err(format!("truncation ({}, {}) outside 2..=12", self.n_mech, self.n_cav));
        }
        if let Some(r) = self.lambda_over_gamma_op {
            if !(r > 0.0 && r.is_finite()) {
                return Err(format!("lambda_over_gamma_op must be positive, got {r}"));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(format!("dt must be positive, got {dt}"));
            }
        }
        if self.samples < 10 {
            return Err("samples must be at least 10".into());
        }
        let [a, b] = self.window;
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(format!("bad fit window [{a}, {b}]"));
        }
        if !(self.convergence_window > 0.0 && self.convergence_window.is_finite()) {
            return Err("convergence_window must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFit {
    pub gamma: f64,
    pub n: f64,
    /// Quasi-steady excited population of the ground-state run.
    pub plateau: f64,
    pub r_squared: f64,
    pub non_exponential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub params: NodeParams,
    pub gamma_op: f64,
    pub gamma_linear: f64,
    pub n_linear: f64,
    pub fit: OracleFit,
    pub step: f64,
    pub step_diff: f64,
    pub warning: Option<String>,
    pub excited: OracleTrajectory,
    pub ground: OracleTrajectory,
}

impl OracleReport {
    pub fn gamma_error(&self) -> f64 {
        (self.fit.gamma - self.gamma_linear).abs() / self.gamma_linear
    }

    pub fn n_error(&self) -> f64 {
        (self.fit.n - self.n_linear).abs() / self.n_linear
    }
}

/// Least-squares line `y = a + b t`; returns `(a, b, R²)`.
pub(crate) fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mt, slope, r2)
}

/// Plateau `p_ss` and rate `r` of `p(t) = p_ss (1 - exp(-r t))`.
fn plateau_fit(t: &[f64], p: &[f64], rate_guess: f64) -> (f64, f64) {
    let amp = |r: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for (ti, pi) in t.iter().zip(p) {
            let f = 1.0 - (-r * ti).exp();
            num += f * pi;
            den += f * f;
        }
        let a = if den > 0.0 { num / den } else { 0.0 };
        let res: f64 = t.iter().zip(p).map(|(ti, pi)| (pi - a * (1.0 - (-r * ti).exp())).powi(2)).sum();
        (a, res)
    };
    // golden section on ln r
    let (mut lo, mut hi) = ((rate_guess * 0.02).ln(), (rate_guess * 50.0).ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (amp(x1.exp()).1, amp(x2.exp()).1);
    for _ in 0..100 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = amp(x1.exp()).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = amp(x2.exp()).1;
        }
    }
    let r = (0.5 * (lo + hi)).exp();
    (amp(r).0, r)
}

/// Rate and occupation from an excited-qubit run and a ground-qubit run.
///
/// `window` is the time window of the log-linear decay fit. The ground run
/// gives the plateau `N/(2N+1)` and the excited run, after subtracting it,
/// decays at `Gamma (2N+1)`.
pub fn extract_rate_and_noise(
    excited: &OracleTrajectory,
    ground: &OracleTrajectory,
    window: (f64, f64),
    rate_guess: f64,
) -> Result<OracleFit, OracleError> {
    if !(rate_guess > 0.0) {
        return Err(OracleError::Fit(format!("rate guess {rate_guess}")));
    }
    let (plateau, _) = plateau_fit(&ground.t, &ground.qubit, rate_guess);
    if !(0.0..0.5).contains(&plateau) {
        return Err(OracleError::Fit(format!("plateau {plateau} outside [0, 1/2)")));
    }
    let n = plateau / (1.0 - 2.0 * plateau);
    let (mut ts, mut ys) = (vec![], vec![]);
    for (t, p) in excited.t.iter().zip(&excited.qubit) {
        if *t >= window.0 && *t <= window.1 {
            let d = p - plateau;
            if d <= 0.0 {
                return Err(OracleError::Fit(format!("population fell below the plateau at t = {t}")));
            }
            ts.push(*t);
            ys.push(d.ln());
        }
    }
    if ts.len() < 3 {
        return Err(OracleError::Fit(format!("only {} samples in the fit window", ts.len())));
    }
    let (_, slope, r2) = linear_fit(&ts, &ys);
    Ok(OracleFit {
        gamma: -slope / (2.0 * n + 1.0),
        n,
        plateau,
        r_squared: r2,
        non_exponential: r2 < MIN_R_SQUARED,
    })
}

/// Full oracle comparison for one node: step-halving check, excited and
/// ground runs, fits, and the linear-model values at the same parameters.
pub fn run_oracle(params: &NodeParams, settings: &OracleSettings) -> Result<OracleReport, OracleError> {
    settings.validate().map_err(OracleError::Input)?;
    let mut p = *params;
    let gamma_op = build_network(&[p])?.cooling_rate(0)?;
    if let Some(r) = settings.lambda_over_gamma_op {
        p.lambda = r * gamma_op;
    }
    let rates = build_network(&[p])?.effective_rates(&[p.omega_q])?;
    let (gamma_linear, n_linear) = (rates.gamma[0], rates.n_occ[0]);
    if !(gamma_linear > 0.0) {
        return Err(OracleError::Input(format!("linear model decay rate {gamma_linear}")));
    }
    let node = FockNode::new(&p, settings.n_mech, settings.n_cav)?;
    let step = settings.dt.unwrap_or_else(|| default_step(&p));
    let t_max = settings.window[1] / gamma_linear;
    let prefix = t_max.min(settings.convergence_window / p.kappa());
    let step_diff = check_convergence(&node, &OracleInitial::excited(), prefix, step, 20)?;
    if step_diff > MAX_STEP_DIFF {
        return Err(OracleError::StepConvergence { diff: step_diff });
    }
    let excited = evolve(&node, &OracleInitial::excited(), t_max, step, settings.samples)?;
    let ground = evolve(&node, &OracleInitial::ground(), t_max, step, settings.samples)?;
    let window = (settings.window[0] / gamma_linear, t_max);
    let fit = extract_rate_and_noise(&excited, &ground, window, gamma_linear)?;
    let warning = fit.non_exponential.then(|| {
        format!(
            "non-exponential decay (R² = {:.4}); adiabaticity violated at lambda/gamma_op = {:.3}",
            fit.r_squared,
            p.lambda / gamma_op
        )
    });
    Ok(OracleReport {
        params: p,
        gamma_op,
        gamma_linear,
        n_linear,
        fit,
        step,
        step_diff,
        warning,
        excited,
        ground,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b, r2) = linear_fit(&t, &y);
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_two_level_fit() {
        let (gamma, n) = (0.01, 0.05);
        let r = gamma * (2.0 * n + 1.0);
        let ss = n / (2.0 * n + 1.0);
        let t: Vec<f64> = (0..=300).map(|k| k as f64).collect();
        let mk = |p0: f64| OracleTrajectory {
            qubit: t.iter().map(|x| ss + (p0 - ss) * (-r * x).exp()).collect(),
            mech: vec![0.0; t.len()],
            cav: vec![0.0; t.len()],
            coherence: vec![0.0; t.len()],
            top_level: vec![0.0; t.len()],
            trace: vec![1.0; t.len()],
            t: t.clone(),
            dt: 1.0,
        };
        let fit = extract_rate_and_noise(&mk(1.0), &mk(0.0), (50.0, 300.0), 0.008).unwrap();
        assert!((fit.gamma - gamma).abs() < 1e-8 * gamma, "{}", fit.gamma);
        assert!((fit.n - n).abs() < 1e-6 * n, "{}", fit.n);
        assert!(!fit.non_exponential);
    }

    #[test]
    fn settings_validation() {
        assert!(OracleSettings::default().validate().is_ok());
        let s = OracleSettings { n_mech: 13, ..Default::default() };
        assert!(s.validate().is_err());
        let s = OracleSettings { window: [3.0, 0.5], ..Default::default() };
        assert!(s.validate().is_err());
    }
}
