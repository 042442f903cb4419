use rayon::prelude::*;

use super::{transfer_with, ScenarioConfig, ScenarioError, SweepAxis};
use crate::params::NodeParams;

/// Largest infidelity accepted in a coefficient fit.
const MAX_INFIDELITY: f64 = 0.2;
/// Largest quadratic/linear ratio at the end of an axis.
const MAX_CURVATURE: f64 = 0.2;
/// Coefficients are reported only below this RMS / mean infidelity.
const MAX_RELATIVE_RMS: f64 = 0.1;
/// Thermal sweeps on a node without mechanical damping use this `gamma_m / kappa`.
const THERMAL_GAMMA_M: f64 = 2e-3;

/// Error channel of a coefficient sweep. The swept value `x` and the
/// fit abscissa are:
///
/// * `Thermal`: `x = Gamma_th / kappa` (via `n_th`), abscissa `x`
/// * `Loss`: `x = kappa_0 / kappa` at fixed total `kappa`, abscissa `x`
/// * `Dephasing`: `x = kappa / (lambda^2 T2)`, abscissa `x`
/// * `Stokes`: `x = kappa / omega_r` with `omega_r - omega_q` and
///   `delta_c - omega_r` held fixed, abscissa `x^2`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Thermal,
    Loss,
    Dephasing,
    Stokes,
}

impl Channel {
    pub fn from_path(path: &str) -> Option<Self> {
        Some(match path {
            "channel.thermal" => Self::Thermal,
            "channel.loss" => Self::Loss,
            "channel.dephasing" => Self::Dephasing,
            "channel.stokes" => Self::Stokes,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Thermal => "thermal",
            Self::Loss => "loss",
            Self::Dephasing => "dephasing",
            Self::Stokes => "stokes",
        }
    }

    pub fn abscissa_label(&self) -> &'static str {
        match self {
            Self::Thermal => "gamma_th/kappa",
            Self::Loss => "kappa_0/kappa",
            Self::Dephasing => "kappa/(lambda^2 T2)",
            Self::Stokes => "kappa^2/omega_r^2",
        }
    }

    pub fn abscissa(&self, x: f64) -> f64 {
        match self {
            Self::Stokes => x * x,
            _ => x,
        }
    }

    /// Scenario with this channel at strength `x` and the other adjustable
    /// channels (thermal, loss, dephasing) switched off.
    pub fn apply(&self, nodes: &[NodeParams; 2], x: f64) -> Result<([NodeParams; 2], [f64; 2]), String> {
        let mut out = *nodes;
        let mut t2 = [f64::INFINITY; 2];
        for (p, t2) in out.iter_mut().zip(t2.iter_mut()) {
            let kappa = p.kappa();
            p.kappa_0 = 0.0;
            p.kappa_f = kappa;
            p.n_th = 0.0;
            match self {
                Self::Thermal => {
                    if x < 0.0 {
                        return Err(format!("negative thermal rate {x}"));
                    }
                    if !(p.gamma_m > 0.0) {
                        p.gamma_m = THERMAL_GAMMA_M * kappa;
                    }
                    p.n_th = x * kappa / p.gamma_m;
                }
                Self::Loss => {
                    if !(0.0..1.0).contains(&x) {
                        return Err(format!("loss fraction {x} outside [0, 1)"));
                    }
                    p.kappa_0 = x * kappa;
                    p.kappa_f = (1.0 - x) * kappa;
                }
                Self::Dephasing => {
                    if x < 0.0 {
                        return Err(format!("negative dephasing {x}"));
                    }
                    if x > 0.0 {
                        *t2 = kappa / (p.lambda * p.lambda * x);
                    }
                }
                Self::Stokes => {
                    if !(x > 0.0) {
                        return Err(format!("kappa/omega_r must be positive, got {x}"));
                    }
                    let wr = kappa / x;
                    p.omega_q = wr - (p.omega_r - p.omega_q);
                    p.delta_c = wr + (p.delta_c - p.omega_r);
                    p.omega_r = wr;
                }
            }
        }
        Ok((out, t2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Worker threads for sweep points (`None`: all available).
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis: String,
    pub index: usize,
    pub value: f64,
    pub abscissa: f64,
    pub fidelity: f64,
    pub residual: f64,
    pub t_f: f64,
    pub per_state: Vec<f64>,
}

impl SweepPoint {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Linear fit of infidelity against one channel's abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisFit {
    pub channel: Channel,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub intercept_se: f64,
    pub rms: f64,
    pub mean_infidelity: f64,
    /// `|c2 x_max| / |c1|` of a quadratic fit `c0 + c1 x + c2 x^2`.
    pub curvature: f64,
    /// Infidelity at zero abscissa, when it was sampled.
    pub baseline: Option<f64>,
    pub points: Vec<SweepPoint>,
}

impl AxisFit {
    /// The fit is trusted when its RMS is within 10% of the mean infidelity.
    pub fn reportable(&self) -> bool {
        self.rms <= MAX_RELATIVE_RMS * self.mean_infidelity
    }

    /// Intercept within two standard errors of the sampled baseline.
    pub fn intercept_consistent(&self) -> Option<bool> {
        self.baseline.map(|b| (self.intercept - b).abs() <= 2.0 * self.intercept_se)
    }

    fn coefficient(&self) -> Option<(f64, f64)> {
        self.reportable().then_some((self.slope, self.slope_se))
    }
}

/// Infidelity coefficients with standard errors, one per channel swept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitResult {
    /// Thermal coefficient.
    pub c1: Option<(f64, f64)>,
    /// Stokes coefficient.
    pub c2: Option<(f64, f64)>,
    /// Dephasing coefficient.
    pub c3: Option<(f64, f64)>,
    /// Slope against `kappa_0 / kappa`.
    pub loss_slope: Option<(f64, f64)>,
    /// Largest fit RMS over the axes.
    pub residual: f64,
    pub axes: Vec<AxisFit>,
}

/// Least squares of `y` on `1, x, .., x^degree`; returns coefficients,
/// their standard errors and the RMS residual.
fn poly_fit(x: &[f64], y: &[f64], degree: usize) -> Result<(Vec<f64>, Vec<f64>, f64), String> {
    let n = x.len();
    let k = degree + 1;
    if n < k {
        return Err(format!("{n} points for {k} coefficients"));
    }
    let a = nalgebra::DMatrix::from_fn(n, k, |i, j| x[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let inv = ata.try_inverse().ok_or("singular normal equations")?;
    let coef = &inv * a.transpose() * &b;
    let res = &a * &coef - &b;
    let ss: f64 = res.iter().map(|r| r * r).sum();
    let rms = (ss / n as f64).sqrt();
    let dof = (n - k).max(1) as f64;
    let s2 = ss / dof;
    let se = (0..k).map(|j| (s2 * inv[(j, j)]).sqrt()).collect();
    Ok((coef.iter().cloned().collect(), se, rms))
}

fn with_pool<T: Send>(opts: &SweepOptions, f: impl FnOnce() -> T + Send) -> Result<T, ScenarioError> {
    match opts.workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScenarioError::config("workers", e))?;
            Ok(pool.install(f))
        }
    }
}

fn set_field(p: &mut NodeParams, field: &str, v: f64) {
    match field {
        "omega_r" => p.omega_r = v,
        "gamma_m" => p.gamma_m = v,
        "n_th" => p.n_th = v,
        "kappa_0" => p.kappa_0 = v,
        "kappa_f" => p.kappa_f = v,
        "g_drive" => p.g_drive = num_complex::Complex64::new(v, 0.0),
        "delta_c" => p.delta_c = v,
        "lambda" => p.lambda = v,
        "omega_q" => p.omega_q = v,
        _ => unreachable!("paths are validated when the config is loaded"),
    }
}

/// Scenario inputs at one value of a generic parameter path.
fn point_inputs(cfg: &ScenarioConfig, path: &str, v: f64) -> Result<([NodeParams; 2], [f64; 2], f64), String> {
    if let Some(ch) = Channel::from_path(path) {
        let (nodes, t2) = ch.apply(&cfg.nodes, v)?;
        return Ok((nodes, t2, ch.abscissa(v)));
    }
    let mut nodes = cfg.nodes;
    let mut t2 = cfg.t2;
    match path.split_once('.') {
        _ if path == "t2" => t2 = [v; 2],
        Some(("nodes", f)) => nodes.iter_mut().for_each(|p| set_field(p, f, v)),
        Some(("node1", f)) => set_field(&mut nodes[0], f, v),
        Some(("node2", f)) => set_field(&mut nodes[1], f, v),
        _ => return Err(format!("unknown parameter path `{path}`")),
    }
    for (i, n) in nodes.iter().enumerate() {
        n.validate().map_err(|e| format!("node{}: {e}", i + 1))?;
    }
    Ok((nodes, t2, v))
}

/// Runs a transfer at every value of one axis. Points run in parallel;
/// results keep the axis order.
pub fn run_axis(cfg: &ScenarioConfig, axis: &SweepAxis, opts: &SweepOptions) -> Result<Vec<SweepPoint>, ScenarioError> {
    let values = axis.values();
    with_pool(opts, || {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let (nodes, t2, abscissa) =
                    point_inputs(cfg, &axis.path, value).map_err(|e| ScenarioError::config(&axis.path, e))?;
                let rep = transfer_with(&nodes, t2, &cfg.pulse, &cfg.design).map_err(|e| match e {
                    ScenarioError::Numerical { context, message } => ScenarioError::Numerical {
                        context: format!("{}[{index}] = {value}: {context}", axis.path),
                        message,
                    },
                    other => other,
                })?;
                Ok(SweepPoint {
                    axis: axis.path.clone(),
                    index,
                    value,
                    abscissa,
                    fidelity: rep.average,
                    residual: rep.residual,
                    t_f: rep.t_f,
                    per_state: rep.per_state,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?
}

fn fit_axis(channel: Channel, axis: &str, points: Vec<SweepPoint>) -> Result<AxisFit, ScenarioError> {
    let range = |m: String| ScenarioError::Range { axis: axis.to_string(), message: m };
    if let Some(p) = points.iter().find(|p| p.infidelity() > MAX_INFIDELITY) {
        return Err(range(format!(
            "infidelity {:.3} at {} exceeds {MAX_INFIDELITY}; use a smaller sweep range",
            p.infidelity(),
            p.value
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.abscissa).collect();
    let y: Vec<f64> = points.iter().map(|p| p.infidelity()).collect();
    let (lin, se, rms) = poly_fit(&x, &y, 1).map_err(range)?;
    let x_max = x.iter().cloned().fold(0.0, f64::max);
    let curvature = if points.len() >= 4 {
        let (quad, _, _) = poly_fit(&x, &y, 2).map_err(range)?;
        (quad[2] * x_max).abs() / quad[1].abs()
    } else {
        0.0
    };
    if curvature > MAX_CURVATURE {
        return Err(range(format!(
            "quadratic term is {:.0}% of the linear one at the largest abscissa; use a smaller sweep range",
            100.0 * curvature
        )));
    }
    let baseline = points.iter().find(|p| p.abscissa == 0.0).map(|p| p.infidelity());
    Ok(AxisFit {
        channel,
        slope: lin[1],
        slope_se: se[1],
        intercept: lin[0],
        intercept_se: se[0],
        rms,
        mean_infidelity: y.iter().sum::<f64>() / y.len() as f64,
        curvature,
        baseline,
        points,
    })
}

/// Sweeps every error-channel axis of the config and fits the infidelity
/// coefficients. Non-channel axes are ignored.
pub fn sweep_and_fit(cfg: &ScenarioConfig, opts: &SweepOptions) -> Result<FitResult, ScenarioError> {
    let mut out = FitResult::default();
    for axis in &cfg.sweep {
        let Some(channel) = Channel::from_path(&axis.path) else { continue };
        let points = run_axis(cfg, axis, opts)?;
        let fit = fit_axis(channel, &axis.path, points)?;
        let coef = fit.coefficient();
        match channel {
            Channel::Thermal => out.c1 = coef,
            Channel::Stokes => out.c2 = coef,
            Channel::Dephasing => out.c3 = coef,
            Channel::Loss => out.loss_slope = coef,
        }
        out.residual = out.residual.max(fit.rms);
        out.axes.push(fit);
    }
    if out.axes.is_empty() {
        return Err(ScenarioError::config("sweep", "no channel.* axis to fit"));
    }
    Ok(out)
}
