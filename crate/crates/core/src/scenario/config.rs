use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use super::ScenarioError;
use crate::multimode::TriCavityParams;
use crate::oracle::OracleSettings;
use crate::params::NodeParams;
use crate::pulses::{Control, DesignOptions, PulseSpec};

/// Unit declaration of a scenario file.
///
/// Frequencies are angular; `2pi*MHz` means the number is `omega / 2 pi`
/// in MHz. The time unit must be the reciprocal of the frequency unit.
/// All values are divided by `reference` (in the declared frequency unit;
/// default: `kappa_f` of the first node) before any computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub frequency: String,
    pub time: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

impl Default for Units {
    fn default() -> Self {
        Self { frequency: "reference".into(), time: "reference".into(), reference: None }
    }
}

/// `(rad/s per unit, matching time unit, seconds per time unit)`
fn frequency_unit(name: &str) -> Option<(f64, &'static str)> {
    use std::f64::consts::TAU;
    Some(match name {
        "2pi*Hz" => (TAU, "s"),
        "2pi*kHz" => (TAU * 1e3, "ms"),
        "2pi*MHz" => (TAU * 1e6, "us"),
        "2pi*GHz" => (TAU * 1e9, "ns"),
        "rad/s" => (1.0, "s"),
        "rad/ms" => (1e3, "ms"),
        "rad/us" => (1e6, "us"),
        "rad/ns" => (1e9, "ns"),
        _ => return None,
    })
}

fn time_unit(name: &str) -> Option<f64> {
    Some(match name {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// One swept parameter. `path` is either an error channel
/// (`channel.thermal`, `channel.loss`, `channel.dephasing`,
/// `channel.stokes`) or a parameter (`nodes.<field>` for both nodes,
/// `node1.<field>`, `node2.<field>`, `t2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => self.min * (self.max / self.min).powf(s),
                }
            })
            .collect()
    }
}

pub(crate) const NODE_FIELDS: [&str; 9] = [
    "omega_r", "gamma_m", "n_th", "kappa_0", "kappa_f", "g_drive", "delta_c", "lambda", "omega_q",
];
pub(crate) const CHANNELS: [&str; 4] =
    ["channel.thermal", "channel.loss", "channel.dephasing", "channel.stokes"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManualPulse {
    gamma0: f64,
    c_shape: f64,
    t_f: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PulseSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residual_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    peak_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control: Option<Control>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defect_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manual: Option<ManualPulse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PulseField {
    Keyword(String),
    Settings(PulseSettings),
}

impl Default for PulseField {
    fn default() -> Self {
        Self::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum T2Field {
    Same(Option<f64>),
    PerQubit([Option<f64>; 2]),
}

impl Default for T2Field {
    fn default() -> Self {
        Self::Same(None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    units: Units,
    nodes: Vec<NodeParams>,
    #[serde(default)]
    t2: T2Field,
    #[serde(default)]
    pulse: PulseField,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sweep: Vec<SweepAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multimode: Option<TriCavityParams>,
}

/// How the control pulse is obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PulseChoice {
    /// Shortest pulse reaching the residual target.
    Auto { residual_target: f64 },
    /// Fixed pulse shape (already in reference units).
    Manual(PulseSpec),
}

/// Validated scenario in reference units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub units: Units,
    /// Reference frequency in rad/s (`None` for dimensionless files).
    pub reference_rad_s: Option<f64>,
    pub nodes: [NodeParams; 2],
    pub t2: [f64; 2],
    pub pulse: PulseChoice,
    pub design: DesignOptions,
    pub sweep: Vec<SweepAxis>,
    pub oracle: Option<OracleSettings>,
    pub multimode: Option<TriCavityParams>,
}

impl ScenarioConfig {
    /// SHA-256 of the canonical serialization of the validated config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn residual_target(&self) -> f64 {
        match self.pulse {
            PulseChoice::Auto { residual_target } => residual_target,
            PulseChoice::Manual(_) => f64::NAN,
        }
    }

    /// Reference-unit value of a swept parameter path, if it exists.
    pub(crate) fn check_path(&self, path: &str) -> bool {
        if CHANNELS.contains(&path) || path == "t2" {
            return true;
        }
        match path.split_once('.') {
            Some(("nodes" | "node1" | "node2", field)) => NODE_FIELDS.contains(&field),
            _ => false,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text).map_err(|e| match e {
        ScenarioError::Config { path: p, message } => ScenarioError::Config {
            path: format!("{}: {p}", path.display()),
            message,
        },
        other => other,
    })
}

const PRESETS: [(&str, &str); 7] = [
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig2_ideal", include_str!("../presets/fig2_ideal.json")),
    ("spin", include_str!("../presets/spin.json")),
    ("charge", include_str!("../presets/charge.json")),
    ("sweep", include_str!("../presets/sweep.json")),
    ("oracle", include_str!("../presets/oracle.json")),
    ("multimode", include_str!("../presets/multimode.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Bundled scenario by name (`spin`, `charge`, `fig2`, ...).
pub fn preset(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::config(name, format!("unknown preset (have {:?})", preset_names())))?;
    parse_config(text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| ScenarioError::config("config", e))?;

    if file.nodes.len() != 2 {
        return Err(ScenarioError::config("nodes", format!("expected 2 nodes, found {}", file.nodes.len())));
    }
    // validate in declared units first, so errors name the original numbers
    for (i, n) in file.nodes.iter().enumerate() {
        n.validate().map_err(|e| ScenarioError::config(format!("nodes[{i}]"), e))?;
    }

    let u = &file.units;
    let (freq_scale, time_scale, reference_rad_s) = if u.frequency == "reference" {
        if u.time != "reference" {
            return Err(ScenarioError::UnitMismatch {
                field: "units.time".into(),
                expected: "reference".into(),
                found: u.time.clone(),
            });
        }
        let r = u.reference.unwrap_or(1.0);
        (1.0 / r, r, None)
    } else {
        let (rad_s, expected_time) = frequency_unit(&u.frequency).ok_or_else(|| {
            ScenarioError::config("units.frequency", format!("unknown unit `{}`", u.frequency))
        })?;
        if u.time != expected_time {
            return Err(ScenarioError::UnitMismatch {
                field: "units.time".into(),
                expected: expected_time.into(),
                found: u.time.clone(),
            });
        }
        let seconds = time_unit(&u.time).expect("paired time unit exists");
        let r = u.reference.unwrap_or(file.nodes[0].kappa_f);
        // a time value t becomes t * seconds * (r * rad_s) in reference units
        (1.0 / r, seconds * r * rad_s, Some(r * rad_s))
    };
    if !(freq_scale.is_finite() && freq_scale > 0.0) {
        return Err(ScenarioError::config("units.reference", "reference frequency must be positive"));
    }

    let nodes = [file.nodes[0].scaled(freq_scale), file.nodes[1].scaled(freq_scale)];

    let t2_in = match file.t2 {
        T2Field::Same(v) => [v, v],
        T2Field::PerQubit(v) => v,
    };
    let mut t2 = [f64::INFINITY; 2];
    for (q, v) in t2_in.iter().enumerate() {
        if let Some(v) = v {
            if !(*v > 0.0) {
                return Err(ScenarioError::config("t2", format!("dephasing time must be positive, got {v}")));
            }
            t2[q] = v * time_scale;
        }
    }

    let settings = match file.pulse {
        PulseField::Keyword(ref k) if k == "auto" => PulseSettings::default(),
        PulseField::Keyword(ref k) => {
            return Err(ScenarioError::config("pulse", format!("expected \"auto\" or an object, found \"{k}\"")))
        }
        PulseField::Settings(ref s) => s.clone(),
    };
    let defaults = DesignOptions::default();
    let design = DesignOptions {
        grid: settings.grid.unwrap_or(defaults.grid),
        peak_fraction: settings.peak_fraction.unwrap_or(defaults.peak_fraction),
        control: settings.control.unwrap_or(defaults.control),
        max_duration: settings.max_duration.unwrap_or(defaults.max_duration),
        defect_tolerance: settings.defect_tolerance,
    };
    if design.grid < 3 {
        return Err(ScenarioError::config("pulse.grid", "need at least 3 samples"));
    }
    let pulse = match settings.manual {
        Some(m) => {
            if settings.residual_target.is_some() {
                return Err(ScenarioError::config("pulse", "manual pulse excludes residual_target"));
            }
            PulseChoice::Manual(PulseSpec {
                gamma0: m.gamma0 * freq_scale,
                c_shape: m.c_shape * freq_scale * freq_scale,
                t_f: m.t_f * time_scale,
                gamma_floor: 0.0,
            })
        }
        None => {
            let residual_target = settings.residual_target.unwrap_or(1e-2);
            if !(residual_target > 0.0 && residual_target < 1.0) {
                return Err(ScenarioError::config("pulse.residual_target", "must lie in (0, 1)"));
            }
            PulseChoice::Auto { residual_target }
        }
    };

    let mut cfg = ScenarioConfig {
        name: file.name.clone(),
        units: file.units.clone(),
        reference_rad_s,
        nodes,
        t2,
        pulse,
        design,
        sweep: file.sweep.clone(),
        oracle: file.oracle.clone(),
        multimode: file.multimode.clone(),
    };
    for (i, ax) in cfg.sweep.iter().enumerate() {
        if !cfg.check_path(&ax.path) {
            return Err(ScenarioError::config(format!("sweep[{i}].path"), format!("unknown parameter path `{}`", ax.path)));
        }
        if ax.count < 2 {
            return Err(ScenarioError::config(format!("sweep[{i}].count"), "need at least 2 points"));
        }
        if ax.scale == Scale::Log && !(ax.min > 0.0 && ax.max > 0.0) {
            return Err(ScenarioError::config(format!("sweep[{i}]"), "log scale needs positive bounds"));
        }
        if !(ax.min.is_finite() && ax.max.is_finite()) {
            return Err(ScenarioError::config(format!("sweep[{i}]"), "bounds must be finite"));
        }
    }
    if let Some(o) = cfg.oracle.as_mut() {
        o.validate().map_err(|e| ScenarioError::config("oracle", e))?;
    }
    if let Some(m) = cfg.multimode.as_ref() {
        m.validate().map_err(|e| ScenarioError::config("multimode", e))?;
    }
    Ok(cfg)
}
