//! The `toricdiag` binary end to end: exit codes, files, reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use toricdiag::io::{read_rows, ResultRow};
use toricdiag::ExperimentConfig;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toricdiag"));
    c.env_remove("TORICDIAG_OUT");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
command = "moments"

[physics]
L = [4, 6]
n = 3
p = { start = 0.1, stop = 0.3, points = 3 }

[mc]
sweeps_thermalize = 50
sweeps_measure = 400
chains = 2
seed = 5
"#;

#[test]
fn descending_grid_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, "[physics]\nL = [8]\np = [0.2, 0.19, 0.3]\n").unwrap();
    let o = run(&["threshold", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("t.toml:3: physics.p:"), "{msg}");
    assert!(msg.contains("strictly increasing"), "{msg}");
}

#[test]
fn unknown_keys_and_wrong_commands_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, "[mc]\nsweeps = 10\n").unwrap();
    let o = run(&["moments", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sweeps"), "{}", stderr(&o));
    fs::write(&cfg, "command = \"negativity\"\n").unwrap();
    let o = run(&["moments", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t.toml:1: command:"), "{}", stderr(&o));
}

#[test]
fn print_config_round_trips_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = run(
        &["moments", "--config", cfg.to_str().unwrap(), "--seed", "99", "--chains", "3", "--format", "jsonl", "--print-config"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = String::from_utf8(o.stdout).unwrap();
    let parsed = ExperimentConfig::parse(&echo, None).unwrap();
    assert_eq!(parsed.mc.seed, 99);
    assert_eq!(parsed.mc.chains, 3);
    assert_eq!(parsed.physics.l, vec![4, 6]);
    assert_eq!(parsed.echo(), echo);
}

#[test]
fn capacity_guard_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, "[physics]\nL = [6]\nmethod = \"exact\"\nerrors = \"symmetric\"\n").unwrap();
    let o = run(&["coherent-info", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("capacity guard"), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, SMALL).unwrap();
    let files = ["results.csv", "accumulators.jsonl", "report.txt", "manifest.json"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = run(&["moments", "--config", cfg.to_str().unwrap(), "--out", "a"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        runs.push(files.map(|f| fs::read(dir.path().join("a").join(f)).unwrap()));
    }
    for (i, f) in files[..3].iter().enumerate() {
        assert!(runs[0][i] == runs[1][i], "{f} differs");
    }
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    assert_eq!(strip(&runs[0][3]), strip(&runs[1][3]));
    let rows = read_rows(&dir.path().join("a/results.csv")).unwrap();
    // five moments at each of 2 sizes × 3 rates
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.seed_base == 5 && r.chains == 2 && r.sweeps_measure == 400));

    let o = run(&["moments", "--config", cfg.to_str().unwrap(), "--out", "c", "--seed", "6"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(
        fs::read(dir.path().join("a/results.csv")).unwrap(),
        fs::read(dir.path().join("c/results.csv")).unwrap()
    );
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = bin()
        .args(["moments", "--config", cfg.to_str().unwrap(), "--format", "jsonl"])
        .env("TORICDIAG_OUT", dir.path().join("env-out"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<ResultRow> = read_rows(&dir.path().join("env-out/results.jsonl")).unwrap();
    assert_eq!(rows.len(), 30);
}

#[test]
fn collapse_and_threshold_reuse_accumulators() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, SMALL.replace("L = [4, 6]", "L = [4, 6, 8]")).unwrap();
    let o = run(&["moments", "--config", cfg.to_str().unwrap(), "--out", "m"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let acc = dir.path().join("m/accumulators.jsonl");
    let reuse = SMALL
        .replace("command = \"moments\"", "")
        .replace("L = [4, 6]", "L = [4, 6, 8]")
        + &format!("\n[analysis]\ninput = {:?}\n", acc.to_str().unwrap());
    fs::write(&cfg, &reuse).unwrap();
    let o = run(&["collapse", "--config", cfg.to_str().unwrap(), "--out", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_rows(&dir.path().join("c/results.csv")).unwrap();
    assert!(rows.iter().any(|r| r.quantity == "nu" && r.value > 0.0));

    // an unattainable expectation is an assertion failure
    fs::write(&cfg, reuse + "expect_p_c = [0.49, 0.001]\n").unwrap();
    let o = run(&["threshold", "--config", cfg.to_str().unwrap(), "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(dir.path().join("t/manifest.json").exists());
}

#[test]
fn exact_relative_entropy_and_negativity_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(
        &cfg,
        "[physics]\nL = [3]\nn = 2\np = [0.1]\nmethod = \"exact\"\nerrors = \"bit-flip\"\nseparations = [1, 2]\n",
    )
    .unwrap();
    let o = run(&["relative-entropy", "--config", cfg.to_str().unwrap(), "--out", "d"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_rows(&dir.path().join("d/results.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.value.is_finite() && r.value > 0.0 && r.method == "exact"));
}

#[test]
fn verify_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "quick", "--out", "v"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    assert!(dir.path().join("v/results.csv").exists());
}
