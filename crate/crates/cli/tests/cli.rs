use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfc")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = lfc(&["simulate", "--trials", "1", "--seed", "17", "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = fs::read(a.join("default.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("default.csv")).unwrap());

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rule,contamination_db,pf_tot,pm_tot,avg_cost,pe_tot,stderr_cost,trials"
    );
    // Seven default rules over eleven grid points.
    assert_eq!(lines.count(), 77);

    let manifest = |d: &Path| -> serde_json::Value {
        serde_json::from_slice(&fs::read(d.join("manifest.json")).unwrap()).unwrap()
    };
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["config_digest"], mb["config_digest"]);
    assert_eq!(ma["scenarios"][0]["seed"], 17);
    assert_eq!(ma["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn config_scenarios_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
[defaults]
trials = 50
contamination_db = [0, 5, 10]
rules = ["mod-map-hd", "or"]

[[scenario]]
name = "small"
sensors = 3

[[scenario]]
name = "worst"
sensors = 20
delta_bar = 0.5
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = lfc(&["simulate", "--config", path(&cfg), "--trials", "20", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["small", "worst"] {
        let text = fs::read_to_string(out.join(format!("{name}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.ends_with(",20")), "{name}: {rows:?}");
        assert!(rows[0].starts_with("mod-map-hd,0,") && rows[3].starts_with("or,0,"));
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[defaults]\ndelta_bar = 1.5\ntrials = 0\n").unwrap();
    let o = lfc(&["simulate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta_bar") && err.contains("trials"), "{err}");

    fs::write(&cfg, "[defaults]\nsensor = 4\n").unwrap();
    let o = lfc(&["simulate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));

    let o = lfc(&["simulate", "--rules", "map-hd,n-of-m:9", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = lfc(&["simulate", "--config", path(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = lfc(&["simulate", "--trials", "1", "--out", path(&blocker)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn priors_table_limits() {
    let o = lfc(&["priors", "--sigmas", "0.01,1,10000,1e306"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.splitn(4, ',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let p = |i: usize, j: usize| rows[i][j].parse::<f64>().unwrap();
    assert_eq!(p(0, 1), 1.0);
    assert!((p(2, 1) - 1.0 / 7.0).abs() < 1e-6);
    for i in 0..3 {
        assert!((p(i, 1) + p(i, 2) - 1.0).abs() < 1e-15);
    }
    assert!(rows[3][3].starts_with("error"), "{:?}", rows[3]);
}

#[test]
fn sensor_curves_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = lfc(&["sensor-curves", "--deltas", "0:1:0.25", "--db", "0,10", "--out", path(dir.path())]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("sensor_curves.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(4).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(&rows[0][2..], &[0.0, 0.0]);
    for sigma_col in 0..2 {
        let col: Vec<&Vec<f64>> = rows.iter().skip(sigma_col).step_by(2).collect();
        for w in col.windows(2) {
            assert!(w[1][2] >= w[0][2] && w[1][3] >= w[0][3]);
        }
    }
}

#[test]
fn validate_passes() {
    let o = lfc(&["validate"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 4);
}
