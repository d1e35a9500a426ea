use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"{
    "seed": 3,
    "problem": {
        "horizon": 1.0, "gap": 0.5,
        "interfaces": [{"curve": {"kind": "constant", "c": 0.0}, "beta": {"kind": "constant", "b": 0.5}}],
        "sigma": {"pieces": [{"kind": "constant", "c": 1.0}], "lower": 1.0, "upper": 1.0}
    },
    "simulate": {"n_paths": 20, "n_steps": 50},
    "validate_gen": {
        "function": {"kind": "unmatched", "p": 1.0},
        "start_points": [-0.2, 0.0, 0.2], "times": [0.5, 1.0], "n_paths": 20000, "n_steps": 200
    },
    "transform_dump": {"n_t": 3, "z_min": -1.0, "z_max": 1.0, "n_z": 11}
}"#;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn skewflow(args: &[&str], dir: &Path, seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skewflow"));
    cmd.args(args).arg("--out-dir").arg(dir).env_remove("SKEWFLOW_SEED");
    if let Some(s) = seed {
        cmd.env("SKEWFLOW_SEED", s);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn validate_fk_reference_problem_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("skew_bm.json");
    let out = skewflow(&["validate-fk", cfg.to_str().unwrap()], dir.path(), None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("fk_report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,u_pde,u_mc,se,gap,tolerance,pass"));
    assert_eq!(lines.filter(|l| l.ends_with(",true")).count(), 4);
}

#[test]
fn validation_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let out = skewflow(&["validate-gen", &cfg], dir.path(), None);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    assert_eq!(code(&skewflow(&["frobnicate", &cfg], dir.path(), None)), 2);
    assert_eq!(code(&skewflow(&["simulate"], dir.path(), None)), 2);
    // Section absent from the config.
    assert_eq!(code(&skewflow(&["solve-pde", &cfg], dir.path(), None)), 2);

    let bad = write_config(&dir, &SMALL.replace(r#""b": 0.5"#, r#""b": 1.5"#));
    let out = skewflow(&["simulate", &bad], dir.path(), None);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("problem.interfaces[0].beta") && err.contains("beta out of (-1,1)"), "{err}");

    let garbled = write_config(&dir, "{\"problem\": ");
    assert_eq!(code(&skewflow(&["simulate", &garbled], dir.path(), None)), 2);
    assert_eq!(code(&skewflow(&["simulate", &cfg], dir.path(), Some("seven"))), 2);
}

#[test]
fn io_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let missing_dir = dir.path().join("no/such/dir");
    assert_eq!(code(&skewflow(&["simulate", &cfg], &missing_dir, None)), 3);
    let missing_cfg = dir.path().join("absent.json");
    assert_eq!(code(&skewflow(&["simulate", missing_cfg.to_str().unwrap()], dir.path(), None)), 3);
}

#[test]
fn seed_override_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let run = |seed: Option<&str>| {
        assert_eq!(code(&skewflow(&["simulate", &cfg], dir.path(), seed)), 0);
        fs::read(dir.path().join("paths.csv")).unwrap()
    };
    let configured = run(None);
    assert_eq!(run(Some("3")), configured);
    let other = run(Some("4"));
    assert_ne!(other, configured);
    assert!(String::from_utf8(other).unwrap().starts_with("path,step,t,x,y\n"));
}

#[test]
fn transform_dump_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let dump = || {
        assert_eq!(code(&skewflow(&["transform-dump", &cfg, "--threads", "1"], dir.path(), None)), 0);
        fs::read_to_string(dir.path().join("transform.csv")).unwrap()
    };
    let first = dump();
    assert_eq!(dump(), first);
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("t,z,mu,R,r,Psi,sigma_bar,b_bar,y_1"));
    assert_eq!(lines.count(), 4 * 11);
    // Every value carries 17 significant digits.
    let row: Vec<&str> = first.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "-1.0000000000000000e0");
}

#[test]
fn sample_configs_parse_and_run() {
    let dir = TempDir::new().unwrap();
    let moving = configs().join("moving_two_interfaces.json");
    assert_eq!(code(&skewflow(&["transform-dump", moving.to_str().unwrap()], dir.path(), None)), 0);
    assert_eq!(code(&skewflow(&["solve-pde", moving.to_str().unwrap()], dir.path(), None)), 0);
    let brownian = configs().join("brownian.json");
    assert_eq!(code(&skewflow(&["validate-ip", brownian.to_str().unwrap()], dir.path(), None)), 0);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let run = |threads: &str| {
        assert_eq!(code(&skewflow(&["validate-gen", &cfg, "--threads", threads], dir.path(), None)), 1);
        fs::read(dir.path().join("gen_report.csv")).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
