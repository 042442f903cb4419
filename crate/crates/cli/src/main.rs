use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omt_core::multimode::{split_scan, MultimodeError};
use omt_core::oracle::{run_oracle, OracleError, OracleSettings};
use omt_core::scenario::{
    fit_csv, load_config, multimode_csv, oracle_csv, preset, preset_names, pulse_csv, rate_scan,
    rates_csv, run_transfer, sweep_and_fit, sweep_csv, transfer_csv, write_csv, CsvTable,
    ScenarioConfig, ScenarioError, SweepOptions,
};

#[derive(Parser)]
#[command(name = "omt", version, about = "Opto-mechanical transducer network scenarios")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Design pulses and simulate the two-node state transfer.
    Transfer(Common),
    /// Run every sweep axis of the config and fit the infidelity coefficients.
    Sweep(Common),
    /// Export the designed control schedule.
    Pulse(Common),
    /// Scan the first node's rates against the drive strength.
    Rates(Common),
    /// Fock-space check of the first node's decay rate and noise.
    Oracle(Common),
    /// Amplitudes of the three-cavity node against the detuning split.
    Multimode(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file, or the name of a bundled preset.
    config: String,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent sweep points.
    #[arg(long)]
    workers: Option<usize>,
    /// Number of samples: schedule grid, scan points or oracle samples.
    #[arg(long)]
    grid: Option<usize>,
}

/// An error with its exit code already decided.
struct Failure {
    code: u8,
    message: String,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self { code: e.exit_code() as u8, message: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = if matches!(e, OracleError::Input(_)) { 2 } else { 3 };
        Self { code, message: format!("oracle: {e}") }
    }
}

impl From<MultimodeError> for Failure {
    fn from(e: MultimodeError) -> Self {
        let code = if matches!(e, MultimodeError::Input(_)) { 2 } else { 3 };
        Self { code, message: format!("multimode: {e}") }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn load(arg: &str) -> Result<ScenarioConfig, ScenarioError> {
    if Path::new(arg).exists() || !preset_names().contains(&arg.trim_end_matches(".json")) {
        load_config(arg)
    } else {
        preset(arg)
    }
}

fn emit(tables: &[(&str, CsvTable)], out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        None => {
            let text: Vec<String> = tables.iter().map(|(_, t)| t.render()).collect();
            print!("{}", text.join("\n"));
        }
        Some(path) => {
            for (suffix, table) in tables {
                write_csv(table, with_suffix(path, suffix))?;
            }
        }
    }
    Ok(())
}

/// `out.csv` with suffix `fit` becomes `out_fit.csv`.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    if suffix.is_empty() {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn run(verb: Verb) -> Result<(), Failure> {
    let (kind, c) = match &verb {
        Verb::Transfer(c) => ("transfer", c),
        Verb::Sweep(c) => ("sweep", c),
        Verb::Pulse(c) => ("pulse", c),
        Verb::Rates(c) => ("rates", c),
        Verb::Oracle(c) => ("oracle", c),
        Verb::Multimode(c) => ("multimode", c),
    };
    if c.workers == Some(0) {
        return Err(invalid("--workers must be at least 1"));
    }
    let mut cfg = load(&c.config)?;
    if let Some(n) = c.grid {
        if n < 2 {
            return Err(invalid("--grid must be at least 2"));
        }
        cfg.design.grid = n;
    }
    let hash = cfg.hash();

    match kind {
        "transfer" => {
            let rep = run_transfer(&cfg)?;
            eprintln!("{}: F = {:.6}, residual = {:.3e}, t_f = {:.4}", cfg.name, rep.average, rep.residual, rep.t_f);
            emit(&[("", transfer_csv(&hash, &rep))], &c.out)
        }
        "pulse" => {
            let rep = run_transfer(&cfg)?;
            emit(&[("", pulse_csv(&hash, &rep.design))], &c.out)
        }
        "sweep" => {
            if cfg.sweep.is_empty() {
                return Err(invalid(format!("{}: no sweep axes", c.config)));
            }
            let fit = sweep_and_fit(&cfg, &SweepOptions { workers: c.workers })?;
            for a in &fit.axes {
                let shown = if a.reportable() { "" } else { " (not reported: fit RMS too large)" };
                eprintln!("{}: slope {:.4} +- {:.4}{shown}", a.channel.name(), a.slope, a.slope_se);
            }
            let points: Vec<_> = fit.axes.iter().flat_map(|a| a.points.iter().cloned()).collect();
            emit(&[("", sweep_csv(&hash, &points)), ("fit", fit_csv(&hash, &fit))], &c.out)
        }
        "rates" => {
            let g_max = 2.0 * cfg.nodes[0].g_abs();
            let rows = rate_scan(&cfg, g_max, c.grid.unwrap_or(60))?;
            emit(&[("", rates_csv(&hash, &rows))], &c.out)
        }
        "oracle" => {
            let mut settings = cfg.oracle.clone().unwrap_or_else(OracleSettings::default);
            if let Some(n) = c.grid {
                settings.samples = n;
            }
            let rep = run_oracle(&cfg.nodes[0], &settings)?;
            eprintln!(
                "oracle: gamma {:.5e} (linear {:.5e}), N {:.5e} (linear {:.5e})",
                rep.fit.gamma, rep.gamma_linear, rep.fit.n, rep.n_linear
            );
            if let Some(w) = &rep.warning {
                eprintln!("warning: {w}");
            }
            emit(&[("", oracle_csv(&hash, &rep))], &c.out)
        }
        _ => {
            let p = cfg.multimode.ok_or_else(|| invalid(format!("{}: no `multimode` block", c.config)))?;
            let n = c.grid.unwrap_or(21);
            let max = 2.0 * p.j_tun;
            let splits: Vec<f64> = (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect();
            let rows = split_scan(&p, &splits)?;
            emit(&[("", multimode_csv(&hash, &rows))], &c.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
