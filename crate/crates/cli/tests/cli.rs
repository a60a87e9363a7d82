use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_clebsch"));
    c.env_remove("CLEBSCH_OUTPUT_DIR");
    c
}

fn write_config(dir: &Path, name: &str, body: &str, out: &Path) -> PathBuf {
    let path = dir.join(name);
    let text = format!("{body}\n[output]\ndir = {:?}\n", out.display().to_string());
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const FINITE: &str = r#"
backend = "finite"
group = "so3"
horizon = 0.0

[integrator]
scheme = "rk4"
dt = 0.01

[finite]
representation = "vectors"
copies = 2
potential = { k = 1.0 }
q = [1.0, 0.0, 0.0, 0.0, 0.7, 0.3]
p = [0.0, 0.7, 0.3, 1.0, 0.14, 0.06]
xi = { offset = [0.2, -0.4, 0.6] }
"#;

#[test]
fn empty_horizon_writes_a_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "t,H,C_norm,J_1,J_2,J_3");
    assert!(!csv.contains('\r'));
    let s = summary(&out);
    assert_eq!(s["samples"], 1);
    assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(s["final"]["t"], 0.0);
}

#[test]
fn invalid_group_backend_pair_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", &FINITE.replace("\"so3\"", "\"u1\""), &out);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("group:"));
    assert!(!out.exists());

    let ymh = "backend = \"ymh\"\ngroup = \"so3\"\nhorizon = 0.0\n[integrator]\nscheme = \"rk4\"\ndt = 0.1\n[ymh]\nn = 2\na = 1.0\n";
    let cfg = write_config(tmp.path(), "y.toml", ymh, &out);
    let o = run(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("group:"));
}

#[test]
fn unknown_keys_and_missing_files_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", &format!("extra_key = 3\n{FINITE}"), &out);
    let o = run(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra_key"));
    assert_eq!(run(&["run", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn check_validates_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    let o = run(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let body = FINITE
        .replace("horizon = 0.0", "horizon = 2.0")
        .replace("scheme = \"rk4\"\ndt = 0.01", "scheme = \"implicit_midpoint\"\ndt = 1.0\nmax_newton = 1")
        .replace("potential = { k = 1.0 }", "potential = { k = 1.0, lambda = 50.0 }");
    let cfg = write_config(tmp.path(), "c.toml", &body, &out);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical failure"));
}

#[test]
fn kasner_summary_contains_fitted_exponents() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let body = "backend = \"gr\"\nhorizon = 1.0\n[integrator]\nscheme = \"rk4\"\ndt = 0.001\n[gr]\nkasner_u = 2.0\n";
    let cfg = write_config(tmp.path(), "c.toml", body, &out);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let fit: Vec<f64> = serde_json::from_value(s["extras"]["fitted_exponents"].clone()).unwrap();
    let u: f64 = 2.0;
    let d = 1.0 + u + u * u;
    let exact = [-u / d, (1.0 + u) / d, u * (1.0 + u) / d];
    for (a, b) in fit.iter().zip(exact) {
        assert!((a - b).abs() < 1e-6, "{fit:?}");
    }
    let header = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert!(header.starts_with("t,H,ham_constraint,diffeo_norm,min_eigenvalue,J_1,J_2,J_3\n"));
}

#[test]
fn summary_config_echo_revalidates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    assert_eq!(run(&["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    let echo = summary(&out)["config"].clone();
    let again = tmp.path().join("echo.toml");
    std::fs::write(&again, toml::to_string(&echo).unwrap()).unwrap();
    let out2 = tmp.path().join("run2");
    let o = bin()
        .env("CLEBSCH_OUTPUT_DIR", &out2)
        .args(["run", again.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&out2)["config"], echo);
}

#[test]
fn output_directory_override() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("configured");
    let over = tmp.path().join("override");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    let o = bin()
        .env("CLEBSCH_OUTPUT_DIR", &over)
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(over.join("timeseries.csv").exists());
    assert!(!out.exists());
}

#[test]
fn static_sweep_reports_not_applicable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let body = FINITE
        .replace("horizon = 0.0", "horizon = 0.2")
        .replace("potential = { k = 1.0 }\n", "")
        .replace("p = [0.0, 0.7, 0.3, 1.0, 0.14, 0.06]", "p = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]")
        .replace("offset = [0.2, -0.4, 0.6]", "offset = [0.0, 0.0, 0.0]");
    let cfg = write_config(tmp.path(), "c.toml", &body, &out);
    let o = run(&["sweep", cfg.to_str().unwrap(), "--dt", "0.02,0.01,0.005"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["slopes"]["constraint_drift"], "not-applicable");
    assert_eq!(s["slopes"]["energy_drift"], "not-applicable");
    for i in 0..3 {
        assert!(out.join(format!("dt_{i}")).join("timeseries.csv").exists());
    }
}

#[test]
fn anharmonic_sweep_has_rk4_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let body = FINITE
        .replace("horizon = 0.0", "horizon = 5.0")
        .replace("potential = { k = 1.0 }", "potential = { k = 1.0, lambda = 1.0 }");
    let cfg = write_config(tmp.path(), "c.toml", &body, &out);
    let o = run(&["sweep", cfg.to_str().unwrap(), "--dt", "0.01,0.005,0.0025"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let c = s["slopes"]["constraint_drift"].as_f64().unwrap();
    assert!((c - 4.0).abs() < 0.3, "{c}");
    // Energy errors of RK4 on Hamiltonian flows carry a dt⁵ component.
    let e = s["slopes"]["energy_drift"].as_f64().unwrap();
    assert!(e > 3.7, "{e}");
}

#[test]
fn sweep_argument_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    let c = cfg.to_str().unwrap();
    assert_eq!(run(&["sweep", c, "--dt", "0.02,0.01"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", c, "--dt", "0.02,0.01,0.001"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", c, "--dt", "0.02,abc,0.005"]).status.code(), Some(2));
}

#[test]
fn checkpoint_round_trip_through_the_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let body = r#"
backend = "ymh"
group = "su2"
horizon = 0.1

[integrator]
scheme = "rk4"
dt = 0.01

[ymh]
n = 4
a = 1.0
mu = 0.5
v = 0.5
seed = 3
"#;
    let cfg = write_config(tmp.path(), "a.toml", body, &first);
    let text = std::fs::read_to_string(&cfg).unwrap() + "checkpoint = true\n";
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = first.join("final.ckpt");
    let bytes = std::fs::read(&ckpt).unwrap();
    assert_eq!(&bytes[..8], b"YMHCKPT1");

    let second = tmp.path().join("second");
    let resumed = body
        .replace("horizon = 0.1", "horizon = 0.0")
        .replace("seed = 3", &format!("checkpoint_in = {:?}", ckpt.display().to_string()));
    let cfg2 = write_config(tmp.path(), "b.toml", &resumed, &second);
    let o = run(&["run", cfg2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = summary(&first)["final"].clone();
    let b = summary(&second)["final"].clone();
    for key in ["H", "gauss_l2", "gauss_linf"] {
        assert_eq!(a[key], b[key], "{key}");
    }
    assert_eq!(b["t"], 0.1);

    let wrong = resumed.replace("n = 4", "n = 5");
    let cfg3 = write_config(tmp.path(), "c.toml", &wrong, &tmp.path().join("third"));
    let o = run(&["check", cfg3.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ymh.checkpoint_in"));
}

#[test]
fn plotscript_references_the_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.toml", FINITE, &out);
    assert_eq!(run(&["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    let o = run(&["plotscript", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let script = std::fs::read_to_string(out.join("plot.py")).unwrap();
    assert!(script.contains("timeseries.csv"));
    assert!(script.contains("\"C_norm\""));
    assert_eq!(run(&["plotscript", tmp.path().join("missing").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            let o = run(&["check", path.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
            n += 1;
        }
    }
    assert!(n >= 4);
}
