use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vfdeploy"));
    c.env_remove("VFDEPLOY_OUT");
    c
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/worked_example.scn")
}

fn key_values(out: &Output) -> HashMap<String, String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

/// Header and data lines of a CSV file with `#` comment lines removed.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn small_run(dir: &Path) -> Output {
    bin()
        .args([
            "run",
            "--variants",
            "two_hop,centralized",
            "--robots",
            "15,20,25,30,35",
            "--seeds",
            "10",
            "--output-dir",
        ])
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn run_writes_one_row_per_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("raw.csv"));
    assert_eq!(rows.len(), 2 * 5 * 10);
    let robots = header.iter().position(|h| h == "robots").unwrap();
    let demand = header.iter().position(|h| h == "demand").unwrap();
    assert!(rows.iter().all(|r| r[robots] == r[demand]));
}

#[test]
fn run_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_run(a.path()).status.success());
    assert!(small_run(b.path()).status.success());
    for f in ["raw.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn summary_matches_raw() {
    let dir = tempfile::tempdir().unwrap();
    assert!(small_run(dir.path()).status.success());
    let (raw_header, raw) = csv_rows(&dir.path().join("raw.csv"));
    let (_, summary) = csv_rows(&dir.path().join("summary.csv"));
    let col = |name: &str| raw_header.iter().position(|h| h == name).unwrap();
    assert_eq!(summary.len(), 2 * 5 * 5);
    for s in &summary {
        let (variant, robots, metric) = (&s[0], &s[1], &s[4]);
        let values: Vec<f64> = raw
            .iter()
            .filter(|r| &r[col("variant")] == variant && &r[col("robots")] == robots)
            .map(|r| r[col(metric)].parse().unwrap())
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let got_mean: f64 = s[5].parse().unwrap();
        let got_std: f64 = s[6].parse().unwrap();
        assert!((got_mean - mean).abs() <= 1e-9 * mean.abs().max(1.0), "{variant} {robots} {metric}");
        assert!((got_std - std).abs() <= 1e-9 * std.abs().max(1.0), "{variant} {robots} {metric}");
        assert_eq!(s[7], values.len().to_string());
    }
}

#[test]
fn config_flags_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--variants",
            "two_hop",
            "--robots",
            "15",
            "--seeds",
            "1",
            "--wait-time",
            "4.5",
            "--min-ds",
            "0.25",
        ])
        .env("VFDEPLOY_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert!(text.contains("# wait_time=4.5\n"));
    assert!(text.contains("# min_ds=0.25\n"));
}

#[test]
fn replay_golden_satisfies_everyone() {
    let out = bin().arg("replay").arg(golden()).output().unwrap();
    assert!(out.status.success());
    let kv = key_values(&out);
    assert_eq!(kv["satisfaction"], "1");
    assert_eq!(kv["variant"], "two_hop");
}

#[test]
fn replay_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = bin().arg("replay").arg(golden()).arg("--trajectory").arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("slot,agent,x,y,status\n"));
    assert!(text.lines().count() > 25);
}

#[test]
fn replay_without_landmarks_is_vacuously_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.scn");
    std::fs::write(&path, "area_width=100\narea_height=100\nR 1 50 50\nR 2 52 50\nR 3 50 53\n").unwrap();
    let out = bin().arg("replay").arg(&path).output().unwrap();
    assert!(out.status.success());
    let kv = key_values(&out);
    assert_eq!(kv["satisfaction"], "1");
    assert_eq!(kv["associated"], "0");
    assert!(kv["total_distance"].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn corrupt_header_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "area_width=wide\nR 1 5 5\n").unwrap();
    let out = bin().arg("replay").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bin().args(["run", "--robots", "x"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["run", "--min-ds", "3"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["replay"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    let out = bin()
        .args(["run", "--variants", "centralized", "--robots", "15", "--seeds", "1", "--output-dir"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_round_trips_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.scn");
    let out = bin().args(["gen", "--robots", "20", "--rng-seed", "9", "--out"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("R ")).count(), 20);
    let demand: u32 = text
        .lines()
        .filter(|l| l.starts_with("L "))
        .map(|l| l.rsplit(' ').next().unwrap().parse::<u32>().unwrap())
        .sum();
    assert_eq!(demand, 20);
    let replay = bin().arg("replay").arg(&path).args(["--variant", "centralized"]).output().unwrap();
    assert_eq!(key_values(&replay)["satisfaction"], "1");
}
