use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OracleError;
use crate::params::NodeParams;

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };
const MAX_LEVELS: usize = 12;
const TRACE_TOL: f64 = 1e-7;
const TOP_LEVEL_TOL: f64 = 1e-6;

/// Sparse operator between parity sectors: `(row, col, value)` triples.
type Sparse = Vec<(usize, usize, f64)>;

/// One node in the Fock basis `|q, n_b, n_c>`.
///
/// The Hamiltonian conserves the parity of `q + n_b + n_c` and every jump
/// operator flips it, so the density matrix splits into parity blocks that
/// are evolved separately. Dynamics run in the interaction picture of
/// `omega_r b†b + delta_c c†c + omega_q sigma_z / 2`.
#[derive(Debug, Clone)]
pub struct FockNode {
    pub n_mech: usize,
    pub n_cav: usize,
    pub params: NodeParams,
    /// `(q, n_b, n_c)` of each local index, per parity.
    states: [Vec<(usize, usize, usize)>; 2],
    /// Entries of `sigma_- b†`, `c† b`, `c† b†` and their adjoints
    /// (row and column in the same parity), without coefficients. All coupling entries of each parity sorted by row, tagged with the
    /// coefficient slot (`2j` for term `j`, `2j + 1` for its adjoint).
    hamiltonian: [Vec<(usize, usize, f64, usize)>; 2],
    /// Jump operators `c`, `b`, `b†` mapping parity `1 - p` into `p`.
    jumps: [[Sparse; 3]; 2],
    /// The same operators as contiguous runs `(dst, src, len)` with a
    /// weight per destination index, for row-wise `rho L†`.
    jump_runs: [[(Vec<(usize, usize, usize)>, Vec<f64>); 3]; 2],
    jump_rates: [f64; 3],
    /// Diagonal of `-1/2 sum_L rate L†L`, per parity.
    damping: [Vec<f64>; 2],
}

/// Initial product state: qubit density matrix, thermal mechanics, empty
/// cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleInitial {
    /// Qubit density matrix in the basis `|0>, |1>`.
    pub qubit: [[C; 2]; 2],
    pub mech_occupation: f64,
}

impl OracleInitial {
    pub fn excited() -> Self {
        Self::diagonal(1.0)
    }

    pub fn ground() -> Self {
        Self::diagonal(0.0)
    }

    /// Qubit in `(|0> + |1>)/sqrt 2`.
    pub fn superposition() -> Self {
        let h = C::new(0.5, 0.0);
        Self { qubit: [[h, h], [h, h]], mech_occupation: 0.0 }
    }

    fn diagonal(p: f64) -> Self {
        Self { qubit: [[C::new(1.0 - p, 0.0), ZERO], [ZERO, C::new(p, 0.0)]], mech_occupation: 0.0 }
    }
}

/// Expectation values sampled along an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    pub t: Vec<f64>,
    /// `<sigma_+ sigma_->`
    pub qubit: Vec<f64>,
    /// `<b† b>`
    pub mech: Vec<f64>,
    /// `<c† c>`
    pub cav: Vec<f64>,
    /// `|<sigma_->|`
    pub coherence: Vec<f64>,
    /// Largest population of a top Fock level (mechanics or cavity).
    pub top_level: Vec<f64>,
    pub trace: Vec<f64>,
    pub dt: f64,
}

/// Row-major complex matrix with split real and imaginary parts, so the
/// row updates vectorize.
#[derive(Clone, Default)]
struct Block {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Block {
    fn zeros(n: usize) -> Self {
        Self { re: vec![0.0; n], im: vec![0.0; n] }
    }

    fn get(&self, k: usize) -> C {
        C::new(self.re[k], self.im[k])
    }
}

/// Parity blocks `rho[p][q]`, each `dims[p] x dims[q]`.
#[derive(Clone)]
struct Blocks {
    rho: [[Block; 2]; 2],
    coherent: bool,
}

/// `o += f * r` on split complex rows.
#[inline(always)]
fn row_axpy(o: (&mut [f64], &mut [f64]), r: (&[f64], &[f64]), f: C) {
    let (or, oi) = o;
    let (rr, ri) = r;
    let n = or.len();
    let (oi, rr, ri) = (&mut oi[..n], &rr[..n], &ri[..n]);
    for j in 0..n {
        or[j] += f.re * rr[j] - f.im * ri[j];
        oi[j] += f.re * ri[j] + f.im * rr[j];
    }
}

impl FockNode {
    pub fn new(params: &NodeParams, n_mech: usize, n_cav: usize) -> Result<Self, OracleError> {
        params
            .validate()
            .map_err(|e| OracleError::Input(e.to_string()))?;
        if !(2..=MAX_LEVELS).contains(&n_mech) || !(2..=MAX_LEVELS).contains(&n_cav) {
            return Err(OracleError::Input(format!(
                "truncation ({n_mech}, {n_cav}) outside 2..=12 levels per mode"
            )));
        }
        let mut states: [Vec<(usize, usize, usize)>; 2] = [vec![], vec![]];
        let mut local = vec![0usize; 2 * n_mech * n_cav];
        let flat = |q: usize, b: usize, c: usize| (q * n_mech + b) * n_cav + c;
        for q in 0..2 {
            for b in 0..n_mech {
                for c in 0..n_cav {
                    let p = (q + b + c) % 2;
                    local[flat(q, b, c)] = states[p].len();
                    states[p].push((q, b, c));
                }
            }
        }
        // matrix element <out| op |in> for the three coupling terms
        let term = |j: usize, (q, b, c): (usize, usize, usize)| -> Option<((usize, usize, usize), f64)> {
            match j {
                // sigma_- b†
                0 if q == 1 && b + 1 < n_mech => Some(((0, b + 1, c), ((b + 1) as f64).sqrt())),
                // c† b
                1 if b >= 1 && c + 1 < n_cav => Some(((q, b - 1, c + 1), (b as f64 * (c + 1) as f64).sqrt())),
                // c† b†
                2 if b + 1 < n_mech && c + 1 < n_cav => {
                    Some(((q, b + 1, c + 1), ((b + 1) as f64 * (c + 1) as f64).sqrt()))
                }
                _ => None,
            }
        };
        let jump = |j: usize, (q, b, c): (usize, usize, usize)| -> Option<((usize, usize, usize), f64)> {
            match j {
                0 if c >= 1 => Some(((q, b, c - 1), (c as f64).sqrt())),
                1 if b >= 1 => Some(((q, b - 1, c), (b as f64).sqrt())),
                2 if b + 1 < n_mech => Some(((q, b + 1, c), ((b + 1) as f64).sqrt())),
                _ => None,
            }
        };
        let mut terms: [[Sparse; 3]; 2] = Default::default();
        let mut terms_adj: [[Sparse; 3]; 2] = Default::default();
        let mut jumps: [[Sparse; 3]; 2] = Default::default();
        for p in 0..2 {
            for (k, &s) in states[p].iter().enumerate() {
                for j in 0..3 {
                    if let Some((out, v)) = term(j, s) {
                        let i = local[flat(out.0, out.1, out.2)];
                        terms[p][j].push((i, k, v));
                        terms_adj[p][j].push((k, i, v));
                    }
                    if let Some((out, v)) = jump(j, s) {
                        let po = 1 - p;
                        let i = local[flat(out.0, out.1, out.2)];
                        jumps[po][j].push((i, k, v));
                    }
                }
            }
        }
        let jump_rates = [
            2.0 * params.kappa(),
            params.gamma_m * (params.n_th + 1.0),
            params.gamma_m * params.n_th,
        ];
        let damping = [0, 1].map(|p| {
            states[p]
                .iter()
                .map(|&(_, b, c)| {
                    let bd_b = b as f64;
                    // b b† is truncated at the top level
                    let b_bd = if b + 1 < n_mech { (b + 1) as f64 } else { 0.0 };
                    -0.5 * (jump_rates[0] * c as f64 + jump_rates[1] * bd_b + jump_rates[2] * b_bd)
                })
                .collect::<Vec<f64>>()
        });
        let hamiltonian = [0, 1].map(|p| {
            let mut all: Vec<(usize, usize, f64, usize)> = vec![];
            for j in 0..3 {
                all.extend(terms[p][j].iter().map(|&(i, k, v)| (i, k, v, 2 * j)));
                all.extend(terms_adj[p][j].iter().map(|&(i, k, v)| (i, k, v, 2 * j + 1)));
            }
            all.sort_by_key(|&(i, k, _, slot)| (i, k, slot));
            all
        });
        let jump_runs = [0, 1].map(|p| {
            [0, 1, 2].map(|j| {
                let mut entries = jumps[p][j].clone();
                entries.sort_by_key(|&(i, _, _)| i);
                let mut weight = vec![0.0; states[p].len()];
                let mut runs: Vec<(usize, usize, usize)> = vec![];
                for &(i, k, v) in &entries {
                    weight[i] = v;
                    match runs.last_mut() {
                        Some((d, s, n)) if *d + *n == i && *s + *n == k => *n += 1,
                        _ => runs.push((i, k, 1)),
                    }
                }
                (runs, weight)
            })
        });
        Ok(Self {
            n_mech,
            n_cav,
            params: *params,
            states,
            hamiltonian,
            jumps,
            jump_runs,
            jump_rates,
            damping,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_mech * self.n_cav
    }

    fn dims(&self) -> [usize; 2] {
        [self.states[0].len(), self.states[1].len()]
    }

    /// Interaction-picture coefficients of the three coupling terms.
    fn coefficients(&self, t: f64) -> [C; 3] {
        let p = &self.params;
        [
            C::from_polar(p.lambda / 2.0, (p.omega_r - p.omega_q) * t),
            p.g_drive * C::from_polar(1.0, (p.delta_c - p.omega_r) * t),
            p.g_drive * C::from_polar(1.0, (p.delta_c + p.omega_r) * t),
        ]
    }

    /// `K rho` for block `(p, q)` with `K = -i H(t) + damping`.
    #[inline(always)]
    fn apply_k(&self, coef: &[C; 3], p: usize, rho: &Block, cols: usize, out: &mut Block) {
        let minus_i = C::new(0.0, -1.0);
        let mut slots = [ZERO; 6];
        for j in 0..3 {
            slots[2 * j] = minus_i * coef[j];
            slots[2 * j + 1] = minus_i * coef[j].conj();
        }
        let ops = &self.hamiltonian[p];
        let mut e = 0;
        for (i, &d) in self.damping[p].iter().enumerate() {
            let r = i * cols..(i + 1) * cols;
            let (or, oi) = (&mut out.re[r.clone()], &mut out.im[r.clone()]);
            for (x, y) in or.iter_mut().zip(&rho.re[r.clone()]) {
                *x = y * d;
            }
            for (x, y) in oi.iter_mut().zip(&rho.im[r]) {
                *x = y * d;
            }
            while e < ops.len() && ops[e].0 == i {
                let (_, k, v, slot) = ops[e];
                let rk = k * cols..(k + 1) * cols;
                row_axpy((&mut *or, &mut *oi), (&rho.re[rk.clone()], &rho.im[rk]), slots[slot] * v);
                e += 1;
            }
        }
    }

    fn initial_blocks(&self, init: &OracleInitial) -> Result<Blocks, OracleError> {
        let n = init.mech_occupation;
        if !(n >= 0.0 && n.is_finite()) {
            return Err(OracleError::Input(format!("mechanical occupation {n}")));
        }
        let thermal: Vec<f64> = {
            let r = n / (n + 1.0);
            let w: Vec<f64> = (0..self.n_mech).map(|k| r.powi(k as i32) / (n + 1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        };
        let dims = self.dims();
        let mut rho: [[Block; 2]; 2] = Default::default();
        for p in 0..2 {
            for q in 0..2 {
                rho[p][q] = Block::zeros(dims[p] * dims[q]);
            }
        }
        let mut coherent = false;
        for p in 0..2 {
            for (i, &(qa, ba, ca)) in self.states[p].iter().enumerate() {
                for q in 0..2 {
                    for (k, &(qb, bb, cb)) in self.states[q].iter().enumerate() {
                        if ba == bb && ca == cb && ca == 0 {
                            let v = init.qubit[qa][qb] * thermal[ba];
                            if v != ZERO {
                                rho[p][q].re[i * dims[q] + k] = v.re;
                                rho[p][q].im[i * dims[q] + k] = v.im;
                                coherent |= p != q;
                            }
                        }
                    }
                }
            }
        }
        Ok(Blocks { rho, coherent })
    }

    fn derivative(&self, t: f64, s: &Blocks, scratch: &mut Blocks, out: &mut Blocks) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime
            return unsafe { self.derivative_avx2(t, s, scratch, out) };
        }
        self.derivative_impl(t, s, scratch, out)
    }

    /// Same code compiled with wider vectors; no fused operations are
    /// introduced, so results are identical.
    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn derivative_avx2(&self, t: f64, s: &Blocks, scratch: &mut Blocks, out: &mut Blocks) {
        self.derivative_impl(t, s, scratch, out)
    }

    #[inline(always)]
    fn derivative_impl(&self, t: f64, s: &Blocks, scratch: &mut Blocks, out: &mut Blocks) {
        let coef = self.coefficients(t);
        let dims = self.dims();
        let pairs: &[(usize, usize)] =
            if s.coherent { &[(0, 0), (1, 1), (0, 1), (1, 0)] } else { &[(0, 0), (1, 1)] };
        // X_pq = K_p rho_pq
        for &(p, q) in pairs {
            self.apply_k(&coef, p, &s.rho[p][q], dims[q], &mut scratch.rho[p][q]);
        }
        for &(p, q) in pairs {
            let (rows, cols) = (dims[p], dims[q]);
            let o = &mut out.rho[p][q];
            // X_pq + (X_qp)†
            let x = &scratch.rho[p][q];
            let y = &scratch.rho[q][p];
            for i in 0..rows {
                let r = i * cols..(i + 1) * cols;
                let yr = y.re[i..].iter().step_by(rows).take(cols);
                let yi = y.im[i..].iter().step_by(rows).take(cols);
                for ((o, x), y) in o.re[r.clone()].iter_mut().zip(&x.re[r.clone()]).zip(yr) {
                    *o = x + y;
                }
                for ((o, x), y) in o.im[r.clone()].iter_mut().zip(&x.im[r]).zip(yi) {
                    *o = x - y;
                }
            }
            // jumps: every L has one entry per column, so
            // (L rho L†)[i, i'] = v v' rho[k, k']
            let src = &s.rho[1 - p][1 - q];
            let sc = dims[1 - q];
            for j in 0..3 {
                let rate = self.jump_rates[j];
                if rate == 0.0 {
                    continue;
                }
                let (runs, weight) = &self.jump_runs[q][j];
                for &(i, k, v) in &self.jumps[p][j] {
                    let f = rate * v;
                    let (ri, rk) = (i * cols..(i + 1) * cols, k * sc..(k + 1) * sc);
                    let (or, oim) = (&mut o.re[ri.clone()], &mut o.im[ri]);
                    let (sr, sim) = (&src.re[rk.clone()], &src.im[rk]);
                    for &(d, s0, n) in runs {
                        let (a, b) = (&mut or[d..d + n], &mut oim[d..d + n]);
                        let (x, y, w) = (&sr[s0..s0 + n], &sim[s0..s0 + n], &weight[d..d + n]);
                        for t in 0..n {
                            a[t] += f * w[t] * x[t];
                            b[t] += f * w[t] * y[t];
                        }
                    }
                }
            }
        }
        out.coherent = s.coherent;
    }

    fn observe(&self, t: f64, s: &Blocks, traj: &mut OracleTrajectory) -> Result<(), OracleError> {
        let dims = self.dims();
        let (mut tr, mut q1, mut nb, mut nc, mut top_b, mut top_c) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for p in 0..2 {
            for (i, &(q, b, c)) in self.states[p].iter().enumerate() {
                let w = s.rho[p][p].re[i * dims[p] + i];
                tr += w;
                q1 += q as f64 * w;
                nb += b as f64 * w;
                nc += c as f64 * w;
                if b + 1 == self.n_mech {
                    top_b += w;
                }
                if c + 1 == self.n_cav {
                    top_c += w;
                }
            }
        }
        let mut coh = ZERO;
        if s.coherent {
            // <sigma_-> = sum rho_{(1,b,c),(0,b,c)}
            for p in 0..2 {
                let q = 1 - p;
                for (i, &(qa, ba, ca)) in self.states[p].iter().enumerate() {
                    if qa != 1 {
                        continue;
                    }
                    if let Some(k) = self.states[q].iter().position(|&x| x == (0, ba, ca)) {
                        coh += s.rho[p][q].get(i * dims[q] + k);
                    }
                }
            }
        }
        traj.trace.push(tr);
        if (tr - 1.0).abs() > TRACE_TOL || !tr.is_finite() {
            return Err(OracleError::Invariant { t, detail: format!("trace {tr}") });
        }
        let top = top_b.max(top_c);
        if top > TOP_LEVEL_TOL {
            return Err(OracleError::Truncation { population: top, t });
        }
        traj.t.push(t);
        traj.qubit.push(q1);
        traj.mech.push(nb);
        traj.cav.push(nc);
        traj.coherence.push(coh.norm());
        traj.top_level.push(top);
        Ok(())
    }

    fn check_positive(&self, t: f64, s: &Blocks) -> Result<(), OracleError> {
        let dims = self.dims();
        let n = dims[0] + dims[1];
        let full = DMatrix::from_fn(n, n, |r, c| {
            let (p, i) = if r < dims[0] { (0, r) } else { (1, r - dims[0]) };
            let (q, k) = if c < dims[0] { (0, c) } else { (1, c - dims[0]) };
            if p != q && !s.coherent {
                return ZERO;
            }
            let a = s.rho[p][q].get(i * dims[q] + k);
            let b = s.rho[q][p].get(k * dims[p] + i).conj();
            (a + b) * 0.5
        });
        let min = full.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -TRACE_TOL {
            return Err(OracleError::Invariant { t, detail: format!("negative eigenvalue {min:e}") });
        }
        Ok(())
    }
}

fn axpy(dst: &mut Blocks, a: &Blocks, h: f64, k: &Blocks) {
    let pairs: &[(usize, usize)] =
        if a.coherent { &[(0, 0), (1, 1), (0, 1), (1, 0)] } else { &[(0, 0), (1, 1)] };
    for &(p, q) in pairs {
        let (d, x, y) = (&mut dst.rho[p][q], &a.rho[p][q], &k.rho[p][q]);
        for ((d, x), y) in d.re.iter_mut().zip(&x.re).zip(&y.re) {
            *d = x + y * h;
        }
        for ((d, x), y) in d.im.iter_mut().zip(&x.im).zip(&y.im) {
            *d = x + y * h;
        }
    }
    dst.coherent = a.coherent;
}

fn hermitize(s: &mut Blocks, dims: [usize; 2]) {
    for p in 0..2 {
        let m = dims[p];
        let b = &mut s.rho[p][p];
        for i in 0..m {
            b.im[i * m + i] = 0.0;
            for k in i + 1..m {
                let re = 0.5 * (b.re[i * m + k] + b.re[k * m + i]);
                let im = 0.5 * (b.im[i * m + k] - b.im[k * m + i]);
                b.re[i * m + k] = re;
                b.re[k * m + i] = re;
                b.im[i * m + k] = im;
                b.im[k * m + i] = -im;
            }
        }
    }
    if s.coherent {
        let (r0, c0) = (dims[0], dims[1]);
        let [row0, row1] = &mut s.rho;
        let (eo, oe) = (&mut row0[1], &mut row1[0]);
        for i in 0..r0 {
            for k in 0..c0 {
                let re = 0.5 * (eo.re[i * c0 + k] + oe.re[k * r0 + i]);
                let im = 0.5 * (eo.im[i * c0 + k] - oe.im[k * r0 + i]);
                eo.re[i * c0 + k] = re;
                eo.im[i * c0 + k] = im;
                oe.re[k * r0 + i] = re;
                oe.im[k * r0 + i] = -im;
            }
        }
    }
}

/// Step size resolving the residual fast rotation `omega_r + delta_c` and
/// the slow couplings.
pub fn default_step(p: &NodeParams) -> f64 {
    let fast = p.omega_r + p.delta_c.abs();
    let slow = [
        2.0 * p.g_abs(),
        p.lambda,
        2.0 * p.kappa(),
        (p.delta_c - p.omega_r).abs(),
        (p.omega_r - p.omega_q).abs(),
    ]
    .into_iter()
    .fold(f64::MIN_POSITIVE, f64::max);
    (0.4 / fast).min(0.05 / slow)
}

/// RK4 evolution up to `t_max` with step `dt`, sampling observables at
/// `samples + 1` evenly spaced times (rounded to whole steps).
pub fn evolve(
    node: &FockNode,
    initial: &OracleInitial,
    t_max: f64,
    dt: f64,
    samples: usize,
) -> Result<OracleTrajectory, OracleError> {
    if !(t_max > 0.0 && dt > 0.0 && samples >= 1) {
        return Err(OracleError::Input(format!("t_max {t_max}, dt {dt}, samples {samples}")));
    }
    let steps_per_sample = ((t_max / samples as f64) / dt).ceil().max(1.0) as usize;
    let h = t_max / (samples * steps_per_sample) as f64;
    let dims = node.dims();
    let mut s = node.initial_blocks(initial)?;
    let mut k1 = s.clone();
    let mut k2 = s.clone();
    let mut k3 = s.clone();
    let mut k4 = s.clone();
    let mut tmp = s.clone();
    let mut scratch = s.clone();
    let mut traj = OracleTrajectory {
        t: vec![],
        qubit: vec![],
        mech: vec![],
        cav: vec![],
        coherence: vec![],
        top_level: vec![],
        trace: vec![],
        dt: h,
    };
    node.observe(0.0, &s, &mut traj)?;
    let check_every = (samples / 10).max(1);
    for n in 0..samples {
        for m in 0..steps_per_sample {
            let t = (n * steps_per_sample + m) as f64 * h;
            node.derivative(t, &s, &mut scratch, &mut k1);
            axpy(&mut tmp, &s, 0.5 * h, &k1);
            node.derivative(t + 0.5 * h, &tmp, &mut scratch, &mut k2);
            axpy(&mut tmp, &s, 0.5 * h, &k2);
            node.derivative(t + 0.5 * h, &tmp, &mut scratch, &mut k3);
            axpy(&mut tmp, &s, h, &k3);
            node.derivative(t + h, &tmp, &mut scratch, &mut k4);
            let pairs: &[(usize, usize)] =
                if s.coherent { &[(0, 0), (1, 1), (0, 1), (1, 0)] } else { &[(0, 0), (1, 1)] };
            for &(p, q) in pairs {
                let (a, b, c, d) = (&k1.rho[p][q], &k2.rho[p][q], &k3.rho[p][q], &k4.rho[p][q]);
                let x = &mut s.rho[p][q];
                for (parts, out) in [((&a.re, &b.re, &c.re, &d.re), &mut x.re), ((&a.im, &b.im, &c.im, &d.im), &mut x.im)] {
                    for ((((v, k1), k2), k3), k4) in out.iter_mut().zip(parts.0).zip(parts.1).zip(parts.2).zip(parts.3) {
                        *v += (k1 + 2.0 * (k2 + k3) + k4) * (h / 6.0);
                    }
                }
            }
            // the X + X† form of the generator amplifies anti-Hermitian
            // roundoff, so project it out every step
            hermitize(&mut s, dims);
        }
        let t = ((n + 1) * steps_per_sample) as f64 * h;
        node.observe(t, &s, &mut traj)?;
        if (n + 1) % check_every == 0 {
            node.check_positive(t, &s)?;
        }
    }
    Ok(traj)
}

/// Largest change of any observable when `dt` is halved over `[0, t_prefix]`.
pub fn check_convergence(
    node: &FockNode,
    initial: &OracleInitial,
    t_prefix: f64,
    dt: f64,
    samples: usize,
) -> Result<f64, OracleError> {
    let a = evolve(node, initial, t_prefix, dt, samples)?;
    let b = evolve(node, initial, t_prefix, dt / 2.0, samples)?;
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    Ok(diff(&a.qubit, &b.qubit)
        .max(diff(&a.mech, &b.mech))
        .max(diff(&a.cav, &b.cav))
        .max(diff(&a.coherence, &b.coherence)))
}
