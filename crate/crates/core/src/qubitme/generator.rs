use nalgebra::Matrix4;
use num_complex::Complex64;
use std::sync::OnceLock;

use super::{MeError, TwoQubitState};
use crate::netlin::EffectiveRates;

type M4 = Matrix4<Complex64>;

/// Master-equation parameters at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSlice {
    pub rates: EffectiveRates,
    /// Dephasing time of each qubit (`f64::INFINITY` for none).
    pub t2: [f64; 2],
    /// Frequency mismatch of qubit 2 relative to qubit 1.
    pub delta: f64,
}

impl GeneratorSlice {
    pub fn new(rates: EffectiveRates, t2: [f64; 2]) -> Self {
        Self { rates, t2, delta: 0.0 }
    }

    pub fn validate(&self) -> Result<(), MeError> {
        let r = &self.rates;
        if r.gamma.len() != 2 || r.n_occ.len() != 2 || r.eta.len() != 2 {
            return Err(MeError::Parameter { field: "rates (two nodes)", value: r.gamma.len() as f64 });
        }
        for &g in &r.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(MeError::Parameter { field: "gamma", value: g });
            }
        }
        for &n in &r.n_occ {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(MeError::Parameter { field: "n_occ", value: n });
            }
        }
        for &e in &r.eta {
            if !(e > 0.0 && e <= 1.0) {
                return Err(MeError::Parameter { field: "eta", value: e });
            }
        }
        if !(r.j12 >= 0.0 && r.j12.is_finite()) {
            return Err(MeError::Parameter { field: "j12", value: r.j12 });
        }
        for &t in &self.t2 {
            if !(t > 0.0) {
                return Err(MeError::Parameter { field: "t2", value: t });
            }
        }
        if !self.delta.is_finite() {
            return Err(MeError::Parameter { field: "delta", value: self.delta });
        }
        Ok(())
    }

    /// Largest rate in the generator, used for step-size control.
    pub fn max_rate(&self) -> f64 {
        let r = &self.rates;
        let mut m = r.j12.max(self.delta.abs());
        for i in 0..2 {
            m = m.max(r.gamma[i] * (1.0 + 2.0 * r.n_occ[i]));
            m = m.max(1.0 / self.t2[i]);
        }
        m
    }
}

struct Ops {
    sm1: M4,
    sm2: M4,
    sz1: M4,
    sz2: M4,
}

fn ops() -> &'static Ops {
    static OPS: OnceLock<Ops> = OnceLock::new();
    OPS.get_or_init(|| {
        let one = Complex64::new(1.0, 0.0);
        let mut sm1 = M4::zeros();
        let mut sm2 = M4::zeros();
        let mut sz1 = M4::zeros();
        let mut sz2 = M4::zeros();
        for q1 in 0..2 {
            for q2 in 0..2 {
                let k = 2 * q1 + q2;
                if q1 == 1 {
                    sm1[(k - 2, k)] = one;
                }
                if q2 == 1 {
                    sm2[(k - 1, k)] = one;
                }
                sz1[(k, k)] = if q1 == 1 { one } else { -one };
                sz2[(k, k)] = if q2 == 1 { one } else { -one };
            }
        }
        Ops { sm1, sm2, sz1, sz2 }
    })
}

/// `d rho / dt` of the cascaded two-qubit master equation.
pub fn apply_generator(state: &TwoQubitState, slice: &GeneratorSlice) -> Result<M4, MeError> {
    slice.validate()?;
    Ok(generator_unchecked(state.rho(), slice))
}

pub(crate) fn generator_unchecked(rho: &M4, slice: &GeneratorSlice) -> M4 {
    CompiledGenerator::new(slice).apply(rho)
}

/// Generator in the form `K rho + rho K† + sum_j r_j L_j rho L_j†`.
pub(crate) struct CompiledGenerator {
    k: M4,
    s: M4,
    jumps: Vec<(M4, f64)>,
}

impl CompiledGenerator {
    pub(crate) fn new(slice: &GeneratorSlice) -> Self {
        let o = ops();
        let r = &slice.rates;
        let i = Complex64::new(0.0, 1.0);
        let re = |x: f64| Complex64::new(x, 0.0);
        let sp1 = o.sm1.adjoint();
        let sp2 = o.sm2.adjoint();

        let s = o.sm1 * re((r.eta[0] * r.gamma[0]).sqrt())
            + o.sm2 * re((r.eta[1] * r.gamma[1]).sqrt());
        let h_herm =
            o.sz2 * re(slice.delta / 2.0) - (o.sm1 * sp2 - sp1 * o.sm2) * (i * (r.j12 / 2.0));
        let mut k = -h_herm * i - s.adjoint() * s * re(0.5);
        let mut jumps = Vec::with_capacity(6);
        for (q, (sm, sz)) in [(o.sm1, o.sz1), (o.sm2, o.sz2)].into_iter().enumerate() {
            let g = r.gamma[q];
            // thermal emission plus the share of decay lost outside the fiber
            let down = g * (r.n_occ[q] + 1.0 - r.eta[q]);
            let up = g * r.n_occ[q];
            let dephase = 1.0 / (2.0 * slice.t2[q]);
            for (l, rate) in [(sm, down), (sm.adjoint(), up), (sz, dephase)] {
                if rate > 0.0 {
                    k -= l.adjoint() * l * re(0.5 * rate);
                    jumps.push((l, rate));
                }
            }
        }
        Self { k, s, jumps }
    }

    pub(crate) fn apply(&self, rho: &M4) -> M4 {
        let x = self.k * rho;
        let mut out = x + x.adjoint() + self.s * rho * self.s.adjoint();
        for (l, rate) in &self.jumps {
            out += l * rho * l.adjoint() * Complex64::new(*rate, 0.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlin::EffectiveRates;

    fn slice(gamma: [f64; 2], j12: f64, n: [f64; 2], eta: f64, t2: f64) -> GeneratorSlice {
        let mut r = EffectiveRates::idle(2);
        r.gamma = gamma.to_vec();
        r.j12 = j12;
        r.n_occ = n.to_vec();
        r.eta = vec![eta; 2];
        GeneratorSlice::new(r, [t2; 2])
    }

    fn random_state() -> TwoQubitState {
        let v = nalgebra::Vector4::new(
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.6, -0.3),
            Complex64::new(0.1, 0.2),
        );
        TwoQubitState::pure(v).unwrap()
    }

    #[test]
    fn frozen_without_rates() {
        let d = apply_generator(&random_state(), &slice([0.0; 2], 0.0, [0.0; 2], 1.0, f64::INFINITY)).unwrap();
        assert_eq!(d, M4::zeros());
    }

    #[test]
    fn ground_state_is_stationary() {
        let sl = slice([0.4, 0.3], 0.3, [0.0; 2], 0.8, 5.0);
        let d = apply_generator(&TwoQubitState::basis(0, 0), &sl).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let sl = slice([0.4, 0.3], 0.3, [0.1, 0.2], 0.8, 5.0);
        let d = apply_generator(&random_state(), &sl).unwrap();
        assert!(d.trace().norm() < 1e-15);
        assert!((d - d.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn emitter_decay_rate() {
        let sl = slice([0.7, 0.0], 0.0, [0.0; 2], 1.0, f64::INFINITY);
        let d = apply_generator(&TwoQubitState::basis(1, 0), &sl).unwrap();
        assert!((d[(2, 2)].re + 0.7).abs() < 1e-15);
    }

    #[test]
    fn dephasing_rate() {
        let plus = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let ground = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let s = TwoQubitState::product(plus, ground).unwrap();
        let sl = slice([0.0; 2], 0.0, [0.0; 2], 1.0, 4.0);
        let d = apply_generator(&s, &sl).unwrap();
        // coherence between |00> and |10> decays at 1/T2
        assert!((d[(0, 2)].re + s.rho()[(0, 2)].re / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_rates() {
        let sl = slice([-0.1, 0.0], 0.0, [0.0; 2], 1.0, 1.0);
        assert!(matches!(apply_generator(&random_state(), &sl), Err(MeError::Parameter { field: "gamma", .. })));
        let sl = slice([0.1, 0.0], 0.0, [-1.0, 0.0], 1.0, 1.0);
        assert!(matches!(apply_generator(&random_state(), &sl), Err(MeError::Parameter { field: "n_occ", .. })));
    }
}
