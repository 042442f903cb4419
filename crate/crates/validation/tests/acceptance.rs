//! Acceptance run. Criteria execute one after another (they are timed, so
//! they must not share the CPU) and each prints a single PASS/FAIL line.
//! The process exits non-zero when any criterion fails.

#[path = "../../core/tests/support/props.rs"]
mod props;

use num_complex::Complex64;
use omt_core::multimode::{split_scan, steady_amplitudes};
use omt_core::netlin::{build_network, decay_rate_approx, normal_mode_frequencies};
use omt_core::oracle::run_oracle;
use omt_core::scenario::{preset, run_transfer, sweep_and_fit, SweepOptions};
use omt_core::NodeParams;
use omt_validation::{all, measure, within, Outcome};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Ideal sideband-resolved transfer.
fn ideal_transfer() -> Outcome {
    measure(1, "ideal transfer", 10.0, || {
        let cfg = preset("fig2_ideal").map_err(err)?;
        let node = &cfg.nodes[0];
        let rep = run_transfer(&cfg).map_err(err)?;
        let ratio = node.kappa() / node.omega_r;
        Ok(all(vec![
            (ratio <= 0.05, format!("kappa/omega_r = {ratio}")),
            (rep.average >= 0.98, format!("F = {:.5} (want >= 0.98)", rep.average)),
            (rep.residual < 1e-2, format!("|v1(t_f)|^2 = {:.10e} (want < 1e-2)", rep.residual)),
        ]))
    })
}

/// Infidelity coefficients from one-channel sweeps.
fn coefficients() -> Outcome {
    measure(2, "coefficient reproduction", 600.0, || {
        let cfg = preset("sweep").map_err(err)?;
        let eight = cfg.sweep.len() == 4 && cfg.sweep.iter().all(|a| a.count == 8);
        let fit = sweep_and_fit(&cfg, &SweepOptions::default()).map_err(err)?;
        let mut parts = vec![(eight, format!("{} axes of 8 points", cfg.sweep.len()))];
        for (name, value, center, tol) in [
            ("C1", fit.c1, 4.0, 1.0),
            ("C3", fit.c3, 7.5, 1.5),
            ("C2", fit.c2, 1.4, 0.7),
            ("loss slope", fit.loss_slope, 2.0 / 3.0, 0.1),
        ] {
            parts.push(match value {
                Some((v, _)) => within(name, v, center, tol),
                None => (false, format!("{name} not reported (fit RMS above 10% of mean infidelity)")),
            });
        }
        Ok(all(parts))
    })
}

/// Spin and charge transducer presets.
fn device_examples() -> Outcome {
    measure(3, "device examples", 60.0, || {
        let mut parts = vec![];
        for name in ["spin", "charge"] {
            let rep = run_transfer(&preset(name).map_err(err)?).map_err(err)?;
            parts.push(within(&format!("F({name})"), rep.average, 0.85, 0.05));
        }
        Ok(all(parts))
    })
}

/// Linear-model rate and noise against the Fock-space oracle.
fn oracle_equivalence() -> Outcome {
    measure(4, "oracle equivalence", 300.0, || {
        let cfg = preset("oracle").map_err(err)?;
        let settings = cfg.oracle.clone().ok_or("oracle preset without settings")?;
        let setup = settings.n_mech == 10 && settings.n_cav == 10 && settings.lambda_over_gamma_op == Some(0.1);
        let rep = run_oracle(&cfg.nodes[0], &settings).map_err(err)?;
        Ok(all(vec![
            (setup, format!("truncation ({}, {})", settings.n_mech, settings.n_cav)),
            (
                rep.gamma_error() <= 0.05,
                format!("Gamma {:.5e} vs {:.5e} (rel {:.2e}, want <= 0.05)", rep.fit.gamma, rep.gamma_linear, rep.gamma_error()),
            ),
            (
                rep.n_error() <= 0.25,
                format!("N {:.5e} vs {:.5e} (rel {:.2e}, want <= 0.25)", rep.fit.n, rep.n_linear, rep.n_error()),
            ),
        ]))
    })
}

/// Local maxima of `f` on a uniform grid, refined by a parabola through
/// the three samples around each.
fn peaks(xs: &[f64], f: &[f64]) -> Vec<(f64, f64)> {
    let h = xs[1] - xs[0];
    let mut out: Vec<(f64, f64)> = (1..f.len() - 1)
        .filter(|&k| f[k] > f[k - 1] && f[k] >= f[k + 1])
        .map(|k| {
            let (a, b, c) = (f[k - 1], f[k], f[k + 1]);
            let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
            (xs[k] + shift * h, b)
        })
        .collect();
    out.sort_by(|p, q| q.1.total_cmp(&p.1));
    out
}

/// Closed-form rate and normal modes against the exact spectrum.
fn formula_consistency() -> Outcome {
    measure(5, "formula consistency", 30.0, || {
        // decay-rate estimate along the drive range, laser frequency fixed
        let reference = NodeParams {
            omega_r: 20.0,
            gamma_m: 0.0,
            n_th: 0.0,
            kappa_0: 0.0,
            kappa_f: 1.0,
            g_drive: Complex64::new(1.5, 0.0),
            delta_c: 20.0,
            lambda: 0.05,
            omega_q: 18.5,
        };
        let (mut worst, mut at) = (0.0f64, 0.0);
        for k in 0..=25 {
            let g = 0.5 + 0.1 * k as f64;
            let p = reference.with_drive_at_fixed_laser(g);
            let exact = build_network(&[p]).and_then(|m| m.effective_rates(&[p.omega_q])).map_err(err)?.gamma[0];
            let rel = (decay_rate_approx(&p).map_err(err)? / exact - 1.0).abs();
            if rel > worst {
                (worst, at) = (rel, g);
            }
        }
        let rate = (worst <= 0.10, format!("rate estimate worst rel error {worst:.3} at G = {at:.1} kappa (want <= 0.10)"));

        // normal-mode peaks at G = 2 kappa, kappa = 0.02 omega_r
        let p = NodeParams {
            omega_r: 50.0,
            gamma_m: 1e-4,
            n_th: 0.0,
            kappa_0: 0.0,
            kappa_f: 1.0,
            g_drive: Complex64::new(2.0, 0.0),
            delta_c: 50.0,
            lambda: 0.05,
            omega_q: 48.5,
        };
        let model = build_network(&[p]).map_err(err)?;
        let xs: Vec<f64> = (0..=4000).map(|k| p.omega_r * (0.8 + 0.4 * k as f64 / 4000.0)).collect();
        let re: Vec<f64> = xs.iter().map(|&w| model.spectrum(w).map(|s| s[(0, 0)].re)).collect::<Result<_, _>>().map_err(err)?;
        let found = peaks(&xs, &re);
        if found.len() < 2 {
            return Ok((false, format!("{} spectral peaks found", found.len())));
        }
        let (hi, lo) = (found[0].0.max(found[1].0), found[0].0.min(found[1].0));
        let (wp, wm) = normal_mode_frequencies(&p).map_err(err)?;
        let off = (hi - wp).abs().max((lo - wm).abs()) / p.omega_r;
        let split = (
            off <= 0.005,
            format!("peaks {lo:.4}, {hi:.4} vs {wm:.4}, {wp:.4} (max offset {off:.2e} omega_r, want <= 5e-3)"),
        );
        Ok(all(vec![rate, split]))
    })
}

fn property_suites() -> Outcome {
    measure(6, "property suites", 120.0, || {
        let mut parts = vec![];
        for (name, check, cases) in props::ALL {
            parts.push(match check(cases) {
                Ok(()) => (true, format!("{name} ok")),
                Err(e) => (false, format!("{name} FAILED: {e}")),
            });
        }
        Ok(all(parts))
    })
}

fn selection_rule() -> Outcome {
    measure(7, "multimode selection rule", 1.0, || {
        let p = preset("multimode").map_err(err)?.multimode.ok_or("multimode preset without parameters")?;
        let setup = p.delta[0] == p.delta[1] && p.j_tun != 0.0 && p.drive.norm() > 0.0;
        let a = steady_amplitudes(&p).map_err(err)?;
        let rel = a[2].norm() / a[0].norm();
        let splits: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let rows = split_scan(&p, &splits).map_err(err)?;
        let monotone = rows.windows(2).all(|w| w[1].leakage > w[0].leakage);
        Ok(all(vec![
            (setup, format!("delta = {:?}, J = {}", p.delta, p.j_tun)),
            (rel <= 1e-12, format!("|<c3>|/|<c1>| = {rel:.1e} (want <= 1e-12)")),
            (
                monotone,
                format!("leakage {:.3e} .. {:.3e} over split 0..2, monotone: {monotone}", rows[1].leakage, rows[20].leakage),
            ),
        ]))
    })
}

fn main() {
    let criteria: [fn() -> Outcome; 7] = [
        ideal_transfer,
        coefficients,
        device_examples,
        oracle_equivalence,
        formula_consistency,
        property_suites,
        selection_rule,
    ];
    let mut failed = 0;
    for criterion in criteria {
        let outcome = criterion();
        println!("{}", outcome.line());
        if !outcome.passed() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
