use std::fmt::Write as _;
use std::path::Path;

use super::{FitResult, RateScanRow, ScenarioError, SweepPoint, TransferReport};
use crate::multimode::SplitPoint;
use crate::oracle::OracleReport;
use crate::pulses::TransferDesign;

/// A CSV table with `#`-prefixed metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(hash: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("config_sha256".into(), hash.into())],
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| number(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// 12 significant digits.
fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{:.11e}", x + 0.0)
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_csv(table: &CsvTable, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, table.render())
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn pulse_csv(hash: &str, design: &TransferDesign) -> CsvTable {
    let s = &design.schedule;
    let mut t = CsvTable::new(hash, &["t", "gamma1", "gamma2", "g1", "g2", "delta_c1", "delta_c2"])
        .meta("gamma0", number(design.spec.gamma0))
        .meta("c_shape", number(design.spec.c_shape))
        .meta("t_f", number(design.spec.t_f))
        .meta("residual", number(design.residual));
    for k in 0..s.len() {
        t.push(vec![s.grid[k], s.gamma1[k], s.gamma2[k], s.g1[k], s.g2[k], s.delta_c1[k], s.delta_c2[k]]);
    }
    t
}

/// Time series of the master-equation parameters along a transfer.
pub fn transfer_csv(hash: &str, rep: &TransferReport) -> CsvTable {
    let mut t = CsvTable::new(hash, &["t", "gamma1", "gamma2", "n1", "n2", "n_local2", "n_casc2", "j12"])
        .meta("average_fidelity", number(rep.average))
        .meta("residual", number(rep.residual))
        .meta("t_f", number(rep.t_f));
    for (label, f) in rep.labels.iter().zip(&rep.per_state) {
        t = t.meta(&format!("fidelity[{label}]"), number(*f));
    }
    for (k, r) in rep.rates.iter().enumerate() {
        t.push(vec![
            rep.design.schedule.grid[k],
            r.gamma[0],
            r.gamma[1],
            r.n_occ[0],
            r.n_occ[1],
            r.n_local[1],
            r.n_casc[1],
            r.j12,
        ]);
    }
    t
}

pub fn rates_csv(hash: &str, rows: &[RateScanRow]) -> CsvTable {
    let mut t = CsvTable::new(hash, &["g", "gamma_exact", "gamma_approx", "n_local", "n_local_approx"]);
    for r in rows {
        t.push(vec![r.g, r.gamma_exact, r.gamma_approx, r.n_local, r.n_local_approx]);
    }
    t
}

/// One row per sweep point: infidelity split into the part already
/// present in the ideal dark-state dynamics and the rest.
pub fn sweep_csv(hash: &str, points: &[SweepPoint]) -> CsvTable {
    let mut t = CsvTable::new(
        hash,
        &["index", "value", "abscissa", "fidelity", "infidelity", "residual", "excess", "t_f"],
    );
    if let Some(p) = points.first() {
        t = t.meta("axis", &p.axis);
    }
    for p in points {
        t.push(vec![
            p.index as f64,
            p.value,
            p.abscissa,
            p.fidelity,
            p.infidelity(),
            p.residual,
            p.infidelity() - p.residual,
            p.t_f,
        ]);
    }
    t
}

pub fn fit_csv(hash: &str, fit: &FitResult) -> CsvTable {
    let mut t = CsvTable::new(
        hash,
        &["channel", "slope", "slope_se", "intercept", "intercept_se", "rms", "mean_infidelity", "curvature", "reported"],
    )
    .meta("channels", fit.axes.iter().map(|a| a.channel.name()).collect::<Vec<_>>().join(";"))
    .meta("abscissas", fit.axes.iter().map(|a| a.channel.abscissa_label()).collect::<Vec<_>>().join(";"));
    for (k, a) in fit.axes.iter().enumerate() {
        t.push(vec![
            k as f64,
            a.slope,
            a.slope_se,
            a.intercept,
            a.intercept_se,
            a.rms,
            a.mean_infidelity,
            a.curvature,
            if a.reportable() { 1.0 } else { 0.0 },
        ]);
    }
    t
}

pub fn oracle_csv(hash: &str, rep: &OracleReport) -> CsvTable {
    let mut t = CsvTable::new(hash, &["t", "excited_qubit", "ground_qubit", "mech", "cav", "top_level"])
        .meta("lambda", number(rep.params.lambda))
        .meta("gamma_op", number(rep.gamma_op))
        .meta("gamma_linear", number(rep.gamma_linear))
        .meta("gamma_fit", number(rep.fit.gamma))
        .meta("n_linear", number(rep.n_linear))
        .meta("n_fit", number(rep.fit.n))
        .meta("r_squared", number(rep.fit.r_squared))
        .meta("dt", number(rep.step));
    let (e, g) = (&rep.excited, &rep.ground);
    for k in 0..e.t.len() {
        t.push(vec![e.t[k], e.qubit[k], g.qubit[k], e.mech[k], e.cav[k], e.top_level[k].max(g.top_level[k])]);
    }
    t
}

pub fn multimode_csv(hash: &str, rows: &[SplitPoint]) -> CsvTable {
    let mut t = CsvTable::new(
        hash,
        &["delta_split", "c1_re", "c1_im", "c2_re", "c2_im", "c3_re", "c3_im", "leakage"],
    );
    for r in rows {
        let a = r.amplitudes;
        t.push(vec![r.split, a[0].re, a[0].im, a[1].re, a[1].im, a[2].re, a[2].im, r.leakage]);
    }
    t
}
