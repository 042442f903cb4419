use std::path::Path;
use std::process::{Command, Output};

fn omt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omt")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| !l.starts_with('#')).unwrap().to_string();
    line.split(',').map(str::to_string).collect()
}

const IDEAL_NODE: &str = r#"{"omega_r": 20, "gamma_m": 0, "n_th": 0, "kappa_0": 0, "kappa_f": 1, "g_drive": [1.5, 0], "delta_c": 20, "lambda": 0.05, "omega_q": 18.5}"#;

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let text = format!(r#"{{"name": "{name}", "nodes": [{IDEAL_NODE}, {IDEAL_NODE}]{extra}}}"#);
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn transfer_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = omt(&["transfer", "fig2_ideal", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# config_sha256="));
    assert!(text.contains("# average_fidelity="));
}

#[test]
fn pulse_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pulse.csv");
    let out = omt(&["pulse", "fig2_ideal", "--grid", "401", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&path), ["t", "gamma1", "gamma2", "g1", "g2", "delta_c1", "delta_c2"]);
    let rows = std::fs::read_to_string(&path).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 402);
}

#[test]
fn sweep_writes_points_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "loss",
        r#", "sweep": [{"path": "channel.loss", "min": 0, "max": 0.06, "count": 3}]"#,
    );
    let path = dir.path().join("sweep.csv");
    let out = omt(&["sweep", &cfg, "--workers", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(header(&path).contains(&"infidelity".to_string()));
    assert!(dir.path().join("sweep_fit.csv").exists());
}

#[test]
fn multimode_to_stdout() {
    let out = omt(&["multimode", "multimode", "--grid", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "delta_split,c1_re,c1_im,c2_re,c2_im,c3_re,c3_im,leakage");
    assert_eq!(rows.len(), 4);
    // symmetric detuning: c3 and leakage vanish
    let first: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&first[5..], &[0.0, 0.0, 0.0]);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&omt(&["transfer", missing.to_str().unwrap()])), 2);

    let unknown = write_config(dir.path(), "unknown", r#", "colour": "blue""#);
    assert_eq!(code(&omt(&["transfer", &unknown])), 2);

    let negative = dir.path().join("negative.json");
    let bad_node = IDEAL_NODE.replace(r#""kappa_f": 1"#, r#""kappa_f": -1"#);
    std::fs::write(&negative, format!(r#"{{"nodes": [{bad_node}, {IDEAL_NODE}]}}"#)).unwrap();
    let out = omt(&["transfer", negative.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa_f"));

    assert_eq!(code(&omt(&["multimode", "fig2"])), 2);
    assert_eq!(code(&omt(&["transfer", "fig2", "--grid", "1"])), 2);
    assert_eq!(code(&omt(&["frobnicate", "fig2"])), 2);
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // an isolated, undamped third cavity has no steady state
    let cfg = write_config(
        dir.path(),
        "singular",
        r#", "multimode": {"delta": [0, 0, 0], "j_tun": 0, "kappa_ctrl": 0.5, "drive": [1, 0]}"#,
    );
    let out = omt(&["multimode", &cfg]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}
