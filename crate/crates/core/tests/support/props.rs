#![allow(dead_code)]

//! Property checks shared by the property tests and the acceptance run.
//! Each check draws `cases` inputs from a fixed-seed generator, so a run is
//! reproducible.

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};

use omt_core::netlin::{build_network, EffectiveRates};
use omt_core::pulses::DesignOptions;
use omt_core::qubitme::{integrate, partial_trace_1, GeneratorSlice, IntegrateOptions, TwoQubitState};
use omt_core::scenario::{transfer_with, PulseChoice};
use omt_core::NodeParams;

pub type Check = fn(u32) -> Result<(), String>;

/// Every check with its name and number of cases.
pub const ALL: [(&str, Check, u32); 7] = [
    ("master equation trace/positivity/hermiticity", master_equation_invariants, 48),
    ("excitation bound", excitation_bound, 48),
    ("dephasing calibration", dephasing_calibration, 32),
    ("lyapunov residual", lyapunov_residual, 64),
    ("collective rate identity", collective_rate_identity, 32),
    ("determinism", determinism, 3),
    ("unit closure", unit_closure, 3),
];

/// Runs the named check with its configured number of cases.
pub fn check(name: &str) -> Result<(), String> {
    let (_, f, cases) = ALL.iter().find(|(n, _, _)| *n == name).expect("known check");
    f(*cases)
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, input) => format!("{why} for input {input:?}"),
        TestError::Abort(why) => why.to_string(),
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalized qubit state from Bloch angles.
fn qubit(theta: f64, phi: f64) -> [Complex64; 2] {
    [c((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)]
}

fn constant_rates(gamma: [f64; 2], eta: [f64; 2], n: [f64; 2], j_scale: f64) -> EffectiveRates {
    EffectiveRates {
        gamma: gamma.to_vec(),
        j12: j_scale * (eta[0] * eta[1] * gamma[0] * gamma[1]).sqrt(),
        theta: vec![0.0; 2],
        n_occ: n.to_vec(),
        n_local: n.to_vec(),
        n_casc: vec![0.0; 2],
        eta: eta.to_vec(),
    }
}

fn constant_run(
    initial: &TwoQubitState,
    slice: GeneratorSlice,
    t_max: f64,
    samples: usize,
    opts: &IntegrateOptions,
) -> Result<Vec<(f64, TwoQubitState)>, TestCaseError> {
    let grid: Vec<f64> = (0..samples).map(|k| t_max * k as f64 / (samples - 1) as f64).collect();
    let slices = vec![slice; samples];
    let tr = integrate(initial, &grid, &slices, opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
    Ok(tr.t.into_iter().zip(tr.states).collect())
}

fn rate() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn fraction() -> impl Strategy<Value = f64> {
    0.3..=1.0f64
}

/// Trace within 1e-8 of one, eigenvalues above -1e-8 and Hermitian
/// matrices along noisy, lossy, dephased cascaded runs.
pub fn master_equation_invariants(cases: u32) -> Result<(), String> {
    let strategy = (
        [rate(), rate()],
        [fraction(), fraction()],
        [0.0..0.3f64, 0.0..0.3f64],
        0.0..2.0f64,
        [0.5..1e3f64, 0.5..1e3f64],
        (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU),
    );
    run(cases, strategy, |(gamma, eta, n, j, t2, (theta, phi))| {
        let initial = TwoQubitState::product(qubit(theta, phi), qubit(0.0, 0.0)).unwrap();
        let slice = GeneratorSlice::new(constant_rates(gamma, eta, n, j), t2);
        for (t, s) in constant_run(&initial, slice, 10.0, 41, &IntegrateOptions::default())? {
            let tr = (s.trace() - c(1.0, 0.0)).norm();
            prop_assert!(tr <= 1e-8, "trace error {tr:e} at t = {t}");
            let m = s.min_eigenvalue();
            prop_assert!(m >= -1e-8, "eigenvalue {m:e} at t = {t}");
            let h = s.hermiticity_defect();
            prop_assert!(h <= 1e-12, "hermiticity defect {h:e} at t = {t}");
        }
        Ok(())
    })
}

/// Without noise, a state in the zero/one excitation sector never
/// populates `|11>`.
pub fn excitation_bound(cases: u32) -> Result<(), String> {
    let strategy = ([rate(), rate()], [fraction(), fraction()], 0.0..2.0f64, 0.0..std::f64::consts::PI);
    run(cases, strategy, |(gamma, eta, j, theta)| {
        let initial = TwoQubitState::product(qubit(theta, 0.3), qubit(0.0, 0.0)).unwrap();
        let slice = GeneratorSlice::new(constant_rates(gamma, eta, [0.0; 2], j), [f64::INFINITY; 2]);
        for (t, s) in constant_run(&initial, slice, 10.0, 41, &IntegrateOptions::default())? {
            let p = s.population(1, 1);
            prop_assert!(p <= 1e-10, "<11|rho|11> = {p:e} at t = {t}");
        }
        Ok(())
    })
}

/// With all rates off, each qubit's coherence decays as `exp(-t/T2)`.
pub fn dephasing_calibration(cases: u32) -> Result<(), String> {
    let strategy = [0.1..10.0f64, 0.1..10.0f64];
    run(cases, strategy, |t2| {
        let plus = qubit(std::f64::consts::FRAC_PI_2, 0.0);
        let initial = TwoQubitState::product(plus, plus).unwrap();
        let slice = GeneratorSlice::new(EffectiveRates::idle(2), t2);
        let opts = IntegrateOptions { max_step_product: 0.01, min_substeps: 1 };
        let t_max = 3.0 * t2[0].max(t2[1]);
        for (t, s) in constant_run(&initial, slice, t_max, 31, &opts)? {
            let r = s.rho();
            // qubit 1 coherence: <0x|rho|1x> summed over x
            let q1 = (r[(0, 2)] + r[(1, 3)]).norm();
            let q2 = partial_trace_1(&s)[(0, 1)].norm();
            for (got, t2) in [(q1, t2[0]), (q2, t2[1])] {
                let want = 0.5 * (-t / t2).exp();
                prop_assert!((got - want).abs() <= 1e-9 * want.max(1e-3), "coherence {got} vs {want} at t = {t}");
            }
        }
        Ok(())
    })
}

fn node() -> impl Strategy<Value = NodeParams> {
    (5.0..50.0f64, 0.5..2.0f64, 0.0..0.5f64, 1e-5..1e-2f64, 0.0..100.0f64, 0.02..0.2f64, 0.8..1.2f64)
        .prop_map(|(wr, kf, k0, gm, nth, g, dc)| NodeParams {
            omega_r: wr,
            gamma_m: gm,
            n_th: nth,
            kappa_0: k0,
            kappa_f: kf,
            g_drive: c(g * wr, 0.0),
            delta_c: dc * wr,
            lambda: 0.05,
            omega_q: wr - 1.5 * (kf + k0),
        })
}

/// The steady covariance solves `A C + C A† + D = 0` to 1e-10 relative,
/// is Hermitian, and no downstream influence reaches upstream.
pub fn lyapunov_residual(cases: u32) -> Result<(), String> {
    run(cases, (node(), node(), 0.5..1.5f64), |(p1, p2, w)| {
        let model = build_network(&[p1, p2]).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let cov = model.steady_covariance().map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (a, d) = (model.drift(), model.diffusion());
        let residual = (a * &cov + &cov * a.adjoint() + d).norm();
        let scale = a.norm() * cov.norm() + d.norm();
        prop_assert!(residual <= 1e-10 * scale, "residual {residual:e} vs scale {scale:e}");
        let herm = (&cov - cov.adjoint()).norm();
        prop_assert!(herm <= 1e-12 * cov.norm(), "hermiticity {herm:e}");
        let s = model.spectrum(w * p1.omega_r).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(s[(0, 1)], c(0.0, 0.0));
        prop_assert!(s[(1, 0)].norm() > 0.0);
        Ok(())
    })
}

fn ideal_node(g: f64) -> NodeParams {
    let reference = NodeParams {
        omega_r: 20.0,
        gamma_m: 0.0,
        n_th: 0.0,
        kappa_0: 0.0,
        kappa_f: 1.0,
        g_drive: c(1.5, 0.0),
        delta_c: 20.0,
        lambda: 0.05,
        omega_q: 18.5,
    };
    reference.with_drive_at_fixed_laser(g)
}

/// Two identical lossless nodes: `J12 = eta sqrt(G1 G2)` within 1%.
pub fn collective_rate_identity(cases: u32) -> Result<(), String> {
    run(cases, 0.5..3.0f64, |g| {
        let p = ideal_node(g);
        let r = build_network(&[p, p])
            .and_then(|m| m.effective_rates(&[p.omega_q, p.omega_q]))
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let want = p.eta() * (r.gamma[0] * r.gamma[1]).sqrt();
        let err = (r.j12 - want).abs() / r.j12;
        prop_assert!(err <= 0.01, "J12 {} vs {want} (rel {err:e})", r.j12);
        Ok(())
    })
}

fn noisy_pair() -> impl Strategy<Value = ([NodeParams; 2], [f64; 2])> {
    (1.2..1.8f64, 0.0..0.05f64, 0.0..5e-5f64, 1e4..1e6f64).prop_map(|(g, k0, gm, t2)| {
        let p = NodeParams { kappa_0: k0, kappa_f: 1.0 - k0, gamma_m: gm, n_th: 100.0, ..ideal_node(g) };
        ([p, p], [t2, t2])
    })
}

fn quick_design() -> DesignOptions {
    DesignOptions { grid: 401, ..DesignOptions::default() }
}

const AUTO: PulseChoice = PulseChoice::Auto { residual_target: 1e-2 };

/// The transfer pipeline gives bit-identical results on repeated runs.
pub fn determinism(cases: u32) -> Result<(), String> {
    run(cases, noisy_pair(), |(nodes, t2)| {
        let a = transfer_with(&nodes, t2, &AUTO, &quick_design()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = transfer_with(&nodes, t2, &AUTO, &quick_design()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(a.average.to_bits(), b.average.to_bits());
        prop_assert_eq!(&a.per_state, &b.per_state);
        prop_assert_eq!(&a.rates, &b.rates);
        prop_assert_eq!(&a.design, &b.design);
        Ok(())
    })
}

/// Expressing every frequency in a different unit leaves the fidelity, the
/// residual and the occupations unchanged within 1e-9.
pub fn unit_closure(cases: u32) -> Result<(), String> {
    run(cases, (noisy_pair(), 1e-2..1e2f64), |((nodes, t2), s)| {
        let scaled = [nodes[0].scaled(s), nodes[1].scaled(s)];
        let a = transfer_with(&nodes, t2, &AUTO, &quick_design()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = transfer_with(&scaled, [t2[0] / s, t2[1] / s], &AUTO, &quick_design())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((a.average - b.average).abs() <= 1e-9, "F {} vs {}", a.average, b.average);
        prop_assert!((a.residual - b.residual).abs() <= 1e-9);
        prop_assert!((a.t_f / (b.t_f * s) - 1.0).abs() <= 1e-9);
        for (ra, rb) in a.rates.iter().zip(&b.rates) {
            for q in 0..2 {
                prop_assert!((ra.n_occ[q] - rb.n_occ[q]).abs() <= 1e-9 * ra.n_occ[q].max(1.0));
            }
        }
        Ok(())
    })
}
