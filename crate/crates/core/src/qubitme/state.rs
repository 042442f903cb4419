use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use super::MeError;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Density matrix of qubit 1 ⊗ qubit 2 in the basis `|00>, |01>, |10>, |11>`
/// (`0` is the ground state).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Wraps `rho` after checking Hermiticity, trace and positivity.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self, MeError> {
        let s = Self { rho };
        s.check(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(rho: Matrix4<Complex64>) -> Self {
        Self { rho }
    }

    /// `|psi><psi|` for a normalized four-component vector.
    pub fn pure(psi: Vector4<Complex64>) -> Result<Self, MeError> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(MeError::Invariant("zero state vector".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(Self { rho: psi * psi.adjoint() })
    }

    /// Product state `|a> ⊗ |b>`.
    pub fn product(a: [Complex64; 2], b: [Complex64; 2]) -> Result<Self, MeError> {
        Self::pure(Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]))
    }

    /// Basis state `|q1 q2>`.
    pub fn basis(q1: usize, q2: usize) -> Self {
        let mut rho = Matrix4::zeros();
        rho[(2 * q1 + q2, 2 * q1 + q2)] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    pub fn rho(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Population of basis state `|q1 q2>`.
    pub fn population(&self, q1: usize, q2: usize) -> f64 {
        self.rho[(2 * q1 + q2, 2 * q1 + q2)].re
    }

    /// Total excitation `<σ+σ-> summed over both qubits.
    pub fn excitation(&self) -> f64 {
        self.population(0, 1) + self.population(1, 0) + 2.0 * self.population(1, 1)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.rho - self.rho.adjoint()).norm()
    }

    pub fn check(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<(), MeError> {
        if self.rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MeError::Invariant("non-finite entries".into()));
        }
        let h = self.hermiticity_defect();
        if h > herm_tol {
            return Err(MeError::Invariant(format!("not Hermitian (defect {h:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(MeError::Invariant(format!("trace {tr} differs from 1")));
        }
        let m = self.min_eigenvalue();
        if m < -pos_tol {
            return Err(MeError::Invariant(format!("negative eigenvalue {m:e}")));
        }
        Ok(())
    }
}

/// Reduced state of qubit 2, tracing out qubit 1.
pub fn partial_trace_1(state: &TwoQubitState) -> Matrix2<Complex64> {
    let r = state.rho();
    Matrix2::from_fn(|i, j| r[(i, j)] + r[(2 + i, 2 + j)])
}
