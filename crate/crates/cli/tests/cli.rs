use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = r#"
[grid]
dim = 1
counts = [64]
lengths = [8.0]
bc = "neumann_cosine"

[potential]
lambda = 3.0
eta = 1.0

[initial]
kind = "band_limited_noise"
mean = 0.2
amplitude = 0.05
seed = 4
cutoff = 6

[solver]
max_steps = 300

[run]
t_end = 0.5

[output]
snapshot_every = 100

[dispersion]
modes = [1, 2, 3]

[cdep]
t_end = 0.05
dt = 1e-3

[sweep]
lambdas = [2.5, 3.0]
etas = [1.0]
levels = [20]
"#;

fn fch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fch")).args(args).output().expect("spawn fch")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_cmd(cmd: &str, config: &Path, out: &Path) -> Output {
    fch(&[cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn constant_state_conserves_mass() {
    let tmp = TempDir::new().unwrap();
    let text = BASE.replace(
        "kind = \"band_limited_noise\"\nmean = 0.2\namplitude = 0.05\nseed = 4\ncutoff = 6",
        "kind = \"constant\"\nmean = 0.3",
    );
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    let o = run_cmd("run", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&out.join("summary.json"));
    assert!(s["mass_drift"].as_f64().unwrap() <= 1e-14);
    assert!(out.join("ledger.csv").exists());
    assert!(out.join("provenance.json").exists());
}

#[test]
fn mean_outside_the_interval_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    for m in ["1.0", "-1.2"] {
        let cfg = write_config(tmp.path(), "m.toml", &BASE.replace("mean = 0.2", &format!("mean = {m}")));
        let o = run_cmd("run", &cfg, &tmp.path().join("out"));
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("-1 < m < 1"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_keys_and_missing_config_exit_1() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "u.toml", &BASE.replace("eta = 1.0\n", "eta = 1.0\ngamma = 2.0\n"));
    assert_eq!(run_cmd("run", &cfg, &tmp.path().join("out")).status.code(), Some(1));
    assert_eq!(fch(&["run"]).status.code(), Some(1));
    assert_eq!(fch(&["frobnicate"]).status.code(), Some(1));
    let missing = tmp.path().join("nope.toml");
    assert_eq!(run_cmd("run", &missing, &tmp.path().join("out")).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_2_and_names_the_invariant() {
    let tmp = TempDir::new().unwrap();
    let text = BASE
        .replace("lambda = 3.0", "lambda = 40.0")
        .replace("mean = 0.2\namplitude = 0.05", "mean = 0.0\namplitude = 0.8")
        .replace(
            "max_steps = 300",
            "stabilization = { fixed = { s1 = 0.0, s2 = 0.0 } }\ndt0 = 50.0\ndt_max = 50.0\ndt_min = 25.0",
        )
        .replace("t_end = 0.5", "t_end = 500.0");
    let cfg = write_config(tmp.path(), "bad.toml", &text);
    let out = tmp.path().join("out");
    let o = run_cmd("run", &cfg, &out);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("energy dissipation"), "{}", stderr(&o));
    // the partial ledger is still written
    assert!(out.join("ledger.csv").exists());
}

#[test]
fn identical_configs_give_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", BASE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run_cmd("run", &cfg, &a).status.code(), Some(0));
    assert_eq!(run_cmd("run", &cfg, &b).status.code(), Some(0));
    for f in ["ledger.csv", "summary.json", "snapshots/state_000100.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (pa, pb) = (json(&a.join("provenance.json")), json(&b.join("provenance.json")));
    assert_eq!(pa["config_sha256"], pb["config_sha256"]);
    assert_eq!(pa["outputs"].as_array().unwrap().len(), pb["outputs"].as_array().unwrap().len());
}

#[test]
fn seed_override_changes_the_initial_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", BASE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run_cmd("init", &cfg, &a).status.code(), Some(0));
    let mut args = vec!["init", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()];
    args.extend(["--seed", "99"]);
    assert_eq!(fch(&args).status.code(), Some(0));
    assert_ne!(std::fs::read(a.join("initial.bin")).unwrap(), std::fs::read(b.join("initial.bin")).unwrap());
}

#[test]
fn verify_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "v.toml", BASE);
    let out = tmp.path().join("out");
    let o = run_cmd("verify", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let checks = json(&out.join("verify.json"));
    assert!(checks.as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn experiment_subcommands_write_their_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e.toml", BASE);
    let cases: [(&str, &[&str]); 4] = [
        ("dispersion", &["dispersion.csv", "dispersion.json"]),
        ("cdep", &["cdep.csv", "cdep.json"]),
        ("sweep", &["sweep.json", "sweep/lambda2.5_eta1_n20/ledger.csv"]),
        ("init", &["initial.bin", "initial_n20.bin"]),
    ];
    for (cmd, files) in cases {
        let out = tmp.path().join(cmd);
        let text = if cmd == "init" { BASE.replace("eta = 1.0\n", "eta = 1.0\ntruncation = 20\n") } else { BASE.into() };
        let cfg = if cmd == "init" { write_config(tmp.path(), "t.toml", &text) } else { cfg.clone() };
        let o = run_cmd(cmd, &cfg, &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        for f in files {
            assert!(out.join(f).exists(), "{cmd}: missing {f}");
        }
        let prov = json(&out.join("provenance.json"));
        assert_eq!(prov["command"], cmd);
        for entry in prov["outputs"].as_array().unwrap() {
            assert_eq!(entry["sha256"].as_str().unwrap().len(), 64);
        }
    }
}
