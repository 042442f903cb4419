use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::NetError;
use crate::params::NodeParams;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MAX_LYAPUNOV_COND: f64 = 1e12;
const LYAPUNOV_REL_TOL: f64 = 1e-10;

pub(crate) const fn idx_b(node: usize) -> usize {
    4 * node
}
pub(crate) const fn idx_bd(node: usize) -> usize {
    4 * node + 1
}
pub(crate) const fn idx_c(node: usize) -> usize {
    4 * node + 2
}
pub(crate) const fn idx_cd(node: usize) -> usize {
    4 * node + 3
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Drift, diffusion and output map of the linearized cascade (`lambda -> 0`).
///
/// The state vector is `(b_1, b_1†, c_1, c_1†, b_2, ...)`. The covariance
/// convention is `C_kl = <x_k x_l†>`, so the stationary state solves
/// `A C + C A† + D = 0`.
#[derive(Debug, Clone)]
pub struct LinearNetworkModel {
    nodes: Vec<NodeParams>,
    drift: DMatrix<Complex64>,
    diffusion: DMatrix<Complex64>,
    output_map: DVector<Complex64>,
}

/// Builds the cascaded network for `nodes`, ordered along the fiber.
pub fn build_network(nodes: &[NodeParams]) -> Result<LinearNetworkModel, NetError> {
    let model = LinearNetworkModel::new_unchecked(nodes)?;
    for node in 0..model.num_nodes() {
        let eig = eigenvalues(&model.node_block(node))?;
        let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re >= 0.0 {
            return Err(NetError::Unstable { node, max_re });
        }
    }
    Ok(model)
}

impl LinearNetworkModel {
    /// Assembles the matrices without the stability check. Spectra of a
    /// marginal model fail at the undamped frequencies.
    pub fn new_unchecked(nodes: &[NodeParams]) -> Result<Self, NetError> {
        if nodes.is_empty() {
            return Err(NetError::NoNodes);
        }
        for (node, p) in nodes.iter().enumerate() {
            p.validate()
                .map_err(|source| NetError::InvalidParams { node, source })?;
        }
        let n = nodes.len();
        let dim = 4 * n;
        let mut drift = DMatrix::<Complex64>::zeros(dim, dim);
        // noise inputs: per node (xi, xi†, f0, f0†), then the fiber input (f_in, f_in†)
        let n_noise = 4 * n + 2;
        let mut coupling = DMatrix::<Complex64>::zeros(dim, n_noise);
        let mut weights = vec![0.0; n_noise];
        let mut output_map = DVector::<Complex64>::zeros(dim);

        for (i, p) in nodes.iter().enumerate() {
            let g = p.g_drive;
            let gc = g.conj();
            let kappa = p.kappa();
            let (b, bd, cc, cd) = (idx_b(i), idx_bd(i), idx_c(i), idx_cd(i));

            drift[(b, b)] = -I * p.omega_r - c(p.gamma_m / 2.0);
            drift[(b, cc)] = -I * gc;
            drift[(b, cd)] = -I * g;

            drift[(bd, bd)] = I * p.omega_r - c(p.gamma_m / 2.0);
            drift[(bd, cc)] = I * gc;
            drift[(bd, cd)] = I * g;

            drift[(cc, cc)] = -I * p.delta_c - c(kappa);
            drift[(cc, b)] = -I * g;
            drift[(cc, bd)] = -I * g;

            drift[(cd, cd)] = I * p.delta_c - c(kappa);
            drift[(cd, b)] = I * gc;
            drift[(cd, bd)] = I * gc;

            for (j, q) in nodes.iter().enumerate().take(i) {
                let k = -2.0 * (p.kappa_f * q.kappa_f).sqrt();
                drift[(cc, idx_c(j))] = c(k);
                drift[(cd, idx_cd(j))] = c(k);
            }

            let sg = p.gamma_m.sqrt();
            coupling[(b, 4 * i)] = c(-sg);
            coupling[(bd, 4 * i + 1)] = c(-sg);
            weights[4 * i] = p.n_th + 1.0;
            weights[4 * i + 1] = p.n_th;

            let s0 = (2.0 * p.kappa_0).sqrt();
            coupling[(cc, 4 * i + 2)] = c(-s0);
            coupling[(cd, 4 * i + 3)] = c(-s0);
            weights[4 * i + 2] = 1.0;

            let sf = (2.0 * p.kappa_f).sqrt();
            coupling[(cc, 4 * n)] = c(-sf);
            coupling[(cd, 4 * n + 1)] = c(-sf);

            output_map[cc] = c(sf);
        }
        weights[4 * n] = 1.0;

        let weighted = DMatrix::from_fn(dim, n_noise, |r, k| coupling[(r, k)] * weights[k]);
        let diffusion = &weighted * coupling.adjoint();

        Ok(Self {
            nodes: nodes.to_vec(),
            drift,
            diffusion,
            output_map,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeParams] {
        &self.nodes
    }

    pub fn drift(&self) -> &DMatrix<Complex64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &DMatrix<Complex64> {
        &self.diffusion
    }

    /// Coefficients of `f_out` after the last node on the state vector; the
    /// fiber input `f_in,1` enters with unit weight on top of this.
    pub fn output_map(&self) -> &DVector<Complex64> {
        &self.output_map
    }

    pub(crate) fn node_block(&self, node: usize) -> DMatrix<Complex64> {
        self.drift.view((4 * node, 4 * node), (4, 4)).into_owned()
    }

    /// Opto-mechanical conversion rate of `node`: the slowest decay among
    /// the eigenvalues of its own 4x4 block.
    pub fn cooling_rate(&self, node: usize) -> Result<f64, NetError> {
        if node >= self.num_nodes() {
            return Err(NetError::NodeIndex(node));
        }
        let eig = eigenvalues(&self.node_block(node))?;
        Ok(eig.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min))
    }

    /// Stationary covariance `C = <x x†>` from the Kronecker-vectorized
    /// Lyapunov equation.
    pub fn steady_covariance(&self) -> Result<DMatrix<Complex64>, NetError> {
        let a = &self.drift;
        let d = &self.diffusion;
        let n = a.nrows();
        let a_conj = a.map(|z| z.conj());
        // column-major vec: vec(A C) = (I ⊗ A) vec C, vec(C A†) = (conj(A) ⊗ I) vec C
        let kron = DMatrix::from_fn(n * n, n * n, |r, s| {
            let (ri, rj) = (r % n, r / n);
            let (si, sj) = (s % n, s / n);
            let mut v = Complex64::new(0.0, 0.0);
            if rj == sj {
                v += a[(ri, si)];
            }
            if ri == si {
                v += a_conj[(rj, sj)];
            }
            v
        });
        let norm_k = one_norm(&kron);
        let lu = kron.lu();
        let inv = lu
            .try_inverse()
            .ok_or(NetError::SingularLyapunov { cond: f64::INFINITY })?;
        let cond = norm_k * one_norm(&inv);
        if !cond.is_finite() || cond > MAX_LYAPUNOV_COND {
            return Err(NetError::SingularLyapunov { cond });
        }
        let rhs = DVector::from_iterator(n * n, d.iter().map(|z| -z));
        let sol = inv * rhs;
        let cov = DMatrix::from_column_slice(n, n, sol.as_slice());

        let residual = (a * &cov + &cov * a.adjoint() + d).norm();
        let tolerance = LYAPUNOV_REL_TOL * (a.norm() * cov.norm() + d.norm());
        if residual > tolerance {
            return Err(NetError::LyapunovResidual { residual, tolerance });
        }
        Ok(cov)
    }

    /// Resolvent `(z I - A)^-1` for a purely imaginary `z`, by block forward
    /// substitution so the upstream blocks stay exactly zero.
    pub(crate) fn resolvent(&self, z: Complex64, omega: f64) -> Result<DMatrix<Complex64>, NetError> {
        let n = self.num_nodes();
        let dim = 4 * n;
        let m = DMatrix::<Complex64>::identity(dim, dim) * z - &self.drift;
        let block = |i: usize, j: usize| m.view((4 * i, 4 * j), (4, 4)).into_owned();
        let mut diag_inv = Vec::with_capacity(n);
        for i in 0..n {
            let mii = block(i, i);
            let norm_m = one_norm(&mii);
            let inv = mii.try_inverse().ok_or(NetError::Resolvent { omega })?;
            let cond = norm_m * one_norm(&inv);
            if !cond.is_finite() || cond > 1e14 {
                return Err(NetError::Resolvent { omega });
            }
            diag_inv.push(inv);
        }
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for j in 0..n {
            out.view_mut((4 * j, 4 * j), (4, 4)).copy_from(&diag_inv[j]);
            for i in j + 1..n {
                let mut acc = DMatrix::<Complex64>::zeros(4, 4);
                for k in j..i {
                    acc += block(i, k) * out.view((4 * k, 4 * j), (4, 4));
                }
                let x = -(&diag_inv[i] * acc);
                out.view_mut((4 * i, 4 * j), (4, 4)).copy_from(&x);
            }
        }
        Ok(out)
    }

    /// Resonator spectrum matrix
    /// `S_ij(w) = (lambda_i lambda_j / 4) int_0^inf <[b_i(t), b_j†(0)]> e^{iwt} dt`.
    ///
    /// The commutator obeys the regression theorem with equal-time data
    /// `diag(1, -1, 1, -1, ...)`, so the transform is the `(b_i, b_j)`
    /// entry of `(-i w - A)^-1`.
    pub fn spectrum(&self, omega: f64) -> Result<DMatrix<Complex64>, NetError> {
        let n = self.num_nodes();
        let res = self.resolvent(-I * omega, omega)?;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let scale = self.nodes[i].lambda * self.nodes[j].lambda / 4.0;
            res[(idx_b(i), idx_b(j))] * scale
        }))
    }

    /// One-sided transform `int_0^inf <x_k(t) x_l†(0)> e^{-iwt} dt` for all
    /// `k, l` given the stationary covariance.
    pub(crate) fn correlation_transform(
        &self,
        cov: &DMatrix<Complex64>,
        omega: f64,
    ) -> Result<DMatrix<Complex64>, NetError> {
        Ok(self.resolvent(I * omega, omega)? * cov)
    }

    /// Normally ordered photon-number density of the fiber field leaving the
    /// last node, `int <f_out†(t) f_out(0)> e^{-iwt} dt` over all `t`.
    pub fn output_photon_density(&self, omega: f64) -> Result<f64, NetError> {
        let cov = self.steady_covariance()?;
        let tr = self.correlation_transform(&cov, omega)?;
        let m = &self.output_map;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m.len() {
            if m[k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for l in 0..m.len() {
                if m[l] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                // f† = sum m_k* x_k†; x_k† is the partner component k ^ 1
                acc += m[k].conj() * m[l] * tr[(k ^ 1, l ^ 1)];
            }
        }
        Ok(2.0 * acc.re)
    }
}

pub(crate) fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>, NetError> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}
