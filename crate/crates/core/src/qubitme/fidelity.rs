use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use super::{partial_trace_1, TwoQubitState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub average: f64,
    pub labels: Vec<&'static str>,
    pub per_state: Vec<f64>,
}

/// The six eigenstates of the Pauli operators.
pub fn cardinal_states() -> [(&'static str, [Complex64; 2]); 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        ("0", [c(1.0, 0.0), c(0.0, 0.0)]),
        ("1", [c(0.0, 0.0), c(1.0, 0.0)]),
        ("+x", [c(h, 0.0), c(h, 0.0)]),
        ("-x", [c(h, 0.0), c(-h, 0.0)]),
        ("+y", [c(h, 0.0), c(0.0, h)]),
        ("-y", [c(h, 0.0), c(0.0, -h)]),
    ]
}

/// Mean fidelity of the state arriving at qubit 2 over the six cardinal
/// inputs on qubit 1 (qubit 2 starts in `|0>`).
///
/// `transfer` maps the initial two-qubit state to the final one. The
/// receiver applies the known phase correction `diag(1, e^{-i phase})`
/// before comparison.
pub fn average_fidelity<F, E>(transfer: F, phase: f64) -> Result<FidelityReport, E>
where
    F: Fn(&TwoQubitState) -> Result<TwoQubitState, E>,
{
    let ground = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let u = Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -phase),
    );
    let mut labels = Vec::with_capacity(6);
    let mut per_state = Vec::with_capacity(6);
    for (label, psi) in cardinal_states() {
        let initial = TwoQubitState::product(psi, ground).expect("cardinal states are normalized");
        let out = transfer(&initial)?;
        let rho2 = u * partial_trace_1(&out) * u.adjoint();
        let v = Vector2::new(psi[0], psi[1]);
        let f = (v.adjoint() * rho2 * v)[(0, 0)].re;
        labels.push(label);
        per_state.push(f);
    }
    let average = per_state.iter().sum::<f64>() / per_state.len() as f64;
    Ok(FidelityReport { average, labels, per_state })
}
