use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::network::{idx_bd, idx_cd, LinearNetworkModel};
use super::{NetError, RATE_FLOOR};

/// Parameters of the reduced two-qubit master equation at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    /// Decay rate of each qubit.
    pub gamma: Vec<f64>,
    /// Magnitude of the cascaded coupling (zero for a single node).
    pub j12: f64,
    /// Phase of each qubit operator; the first is zero by convention.
    pub theta: Vec<f64>,
    /// Total effective occupation, `n_local + n_casc`.
    pub n_occ: Vec<f64>,
    /// Occupation generated by the node itself.
    pub n_local: Vec<f64>,
    /// Occupation caused by noise emitted upstream.
    pub n_casc: Vec<f64>,
    /// Fiber fraction `kappa_f / kappa` of each node.
    pub eta: Vec<f64>,
}

impl EffectiveRates {
    /// Rates for one or two idle qubits, all channels switched off.
    pub fn idle(num_nodes: usize) -> Self {
        Self {
            gamma: vec![0.0; num_nodes],
            j12: 0.0,
            theta: vec![0.0; num_nodes],
            n_occ: vec![0.0; num_nodes],
            n_local: vec![0.0; num_nodes],
            n_casc: vec![0.0; num_nodes],
            eta: vec![1.0; num_nodes],
        }
    }
}

impl LinearNetworkModel {
    /// Decay rates, cascaded coupling and occupations seen by qubits at
    /// frequencies `omega_q` (one per node).
    pub fn effective_rates(&self, omega_q: &[f64]) -> Result<EffectiveRates, NetError> {
        let n = self.num_nodes();
        if n > 2 {
            return Err(NetError::UnsupportedNodeCount(n));
        }
        if omega_q.len() != n {
            return Err(NetError::NodeIndex(omega_q.len()));
        }
        let cov = self.steady_covariance()?;
        let mut gamma = Vec::with_capacity(n);
        let mut n_occ = Vec::with_capacity(n);
        for (i, &wq) in omega_q.iter().enumerate() {
            let g = 2.0 * self.spectrum(wq)?[(i, i)].re;
            if !(g > RATE_FLOOR) {
                return Err(NetError::DegenerateRate { node: i, gamma: g });
            }
            gamma.push(g);
            n_occ.push(self.occupation(&cov, i, wq, g)?);
        }

        let mut n_local = Vec::with_capacity(n);
        for (i, &wq) in omega_q.iter().enumerate() {
            if i == 0 {
                n_local.push(n_occ[0]);
                continue;
            }
            // upstream sources off: the node sees plain vacuum on the fiber
            let alone = LinearNetworkModel::new_unchecked(&self.nodes()[i..=i])?;
            let cov0 = alone.steady_covariance()?;
            n_local.push(alone.occupation(&cov0, 0, wq, gamma[i])?);
        }
        let n_casc = n_occ.iter().zip(&n_local).map(|(a, b)| a - b).collect();

        let (j12, theta) = if n == 2 {
            let s21 = self.spectrum(omega_q[0])?[(1, 0)];
            (s21.norm(), vec![0.0, s21.arg()])
        } else {
            (0.0, vec![0.0])
        };

        Ok(EffectiveRates {
            gamma,
            j12,
            theta,
            n_occ,
            n_local,
            n_casc,
            eta: self.nodes().iter().map(|p| p.eta()).collect(),
        })
    }

    /// `(lambda^2 / 2 gamma) Re int_0^inf <b†(t) b(0)> e^{-i wq t} dt`.
    fn occupation(
        &self,
        cov: &DMatrix<Complex64>,
        node: usize,
        wq: f64,
        gamma: f64,
    ) -> Result<f64, NetError> {
        let tr = self.correlation_transform(cov, wq)?;
        let lambda = self.nodes()[node].lambda;
        let n = lambda * lambda / (2.0 * gamma) * tr[(idx_bd(node), idx_bd(node))].re;
        if n < -1e-12 * (1.0 + n.abs()) {
            return Err(NetError::NegativeOccupation { node, n });
        }
        Ok(n.max(0.0))
    }

    /// Estimate of the upstream noise seen by each node: twice the fiber
    /// coupling times the photon spectral density of every upstream cavity
    /// at the qubit frequency.
    pub fn cascaded_noise_approx(&self, omega_q: &[f64]) -> Result<Vec<f64>, NetError> {
        let n = self.num_nodes();
        if omega_q.len() != n {
            return Err(NetError::NodeIndex(omega_q.len()));
        }
        let cov = self.steady_covariance()?;
        let mut out = Vec::with_capacity(n);
        for (i, &wq) in omega_q.iter().enumerate() {
            let tr = self.correlation_transform(&cov, wq)?;
            let acc: f64 = (0..i)
                .map(|j| {
                    let density = 2.0 * tr[(idx_cd(j), idx_cd(j))].re;
                    2.0 * self.nodes()[j].kappa_f * density
                })
                .sum();
            out.push(acc);
        }
        Ok(out)
    }

    /// Occupation `<b† b>` of each mechanical mode in the stationary state.
    pub fn mechanical_occupation(&self) -> Result<Vec<f64>, NetError> {
        let cov = self.steady_covariance()?;
        Ok((0..self.num_nodes())
            .map(|i| cov[(idx_bd(i), idx_bd(i))].re)
            .collect())
    }

    /// Occupation of each cavity mode in the stationary state.
    pub fn cavity_occupation(&self) -> Result<Vec<f64>, NetError> {
        let cov = self.steady_covariance()?;
        Ok((0..self.num_nodes())
            .map(|i| cov[(idx_cd(i), idx_cd(i))].re)
            .collect())
    }
}
