use std::path::Path;
use std::process::Command;

use rabi_cli::{parse_config, RunConfig};

fn rabi() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rabi"));
    c.env("RABI_THREADS", "1");
    c
}

fn lines(p: &Path) -> Vec<String> {
    std::fs::read_to_string(p).unwrap().lines().map(str::to_string).collect()
}

fn column(lines: &[String], name: &str) -> Vec<String> {
    let header: Vec<&str> = lines[1].split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines[2..].iter().map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn linear_grid_flag() {
    let cfg = parse_config(["rabi", "sweep", "--ratio", "1e-2", "--lambda-rel", "0.9:1.1:41", "--out", "r.csv"]).unwrap();
    let RunConfig::Sweep(s) = cfg else { panic!() };
    assert_eq!(s.grid.lambda_points.len(), 41);
    assert_eq!(s.grid.lambda_points[0], 0.9);
    assert!((s.grid.lambda_points[40] - 1.1).abs() < 1e-15);
    assert_eq!(s.grid.ratios, vec![1e-2]);
}

#[test]
fn log_grid_flag() {
    let cfg = parse_config(["rabi", "sweep", "--ratio", "1e-7", "--lambda-dist-log", "-6:-2:41", "--out", "r.csv"]).unwrap();
    let RunConfig::Sweep(s) = cfg else { panic!() };
    let l = &s.grid.lambda_points;
    assert_eq!(l.len(), 41);
    assert!((l[0] - 1.0 - 1e-6).abs() < 1e-15);
    assert!((l[20] - 1.0 - 1e-4).abs() < 1e-15);
}

#[test]
fn usage_errors() {
    for argv in [
        vec!["rabi", "sweep", "--ratio", "1e-2"],
        vec!["rabi", "sweep", "--lambda-rel", "0:1:3", "--lambda-dist-log", "-3:-1:3", "--out", "x.csv"],
        vec!["rabi", "sweep", "--ratio", "abc", "--out", "x.csv"],
        vec!["rabi", "sweep", "--bogus", "1", "--out", "x.csv"],
        vec!["rabi", "sweep", "--lambda-rel", "0:1", "--out", "x.csv"],
    ] {
        assert!(parse_config(argv.clone()).is_err(), "{argv:?}");
    }
    let out = rabi().args(["sweep", "--ratio", "1e-2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = rabi().args(["sweep", "--nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "# sweep settings\nratio = 1e-3\nlambda_dist_log = -3:-1:5\nn-qubits = 2\nmax_rounds = 4 # trailing\n",
    )
    .unwrap();
    let c = cfg_path.to_str().unwrap();
    let RunConfig::Sweep(s) = parse_config(["rabi", "sweep", "--config", c, "--ratio", "0.1", "--out", "o.csv"]).unwrap() else {
        panic!()
    };
    assert_eq!(s.grid.ratios, vec![0.1]);
    assert_eq!(s.grid.n_qubits_list, vec![2]);
    assert_eq!(s.trunc.max_rounds, 4);
    assert_eq!(s.grid.lambda_points.len(), 5);
    let RunConfig::Sweep(s) =
        parse_config(["rabi", "sweep", "--config", c, "--lambda-rel", "0:1:3", "--out", "o.csv"]).unwrap()
    else {
        panic!()
    };
    assert_eq!(s.grid.lambda_points, vec![0.0, 0.5, 1.0]);

    std::fs::write(&cfg_path, "ratio = 1e-3\ncolour = blue\n").unwrap();
    assert!(parse_config(["rabi", "sweep", "--config", c, "--out", "o.csv"]).is_err());
}

#[test]
fn sweep_writes_schema_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let st = rabi()
            .args(["sweep", "--ratio", "0.1", "--lambda-rel", "0:1.5:4", "--seed", "11", "--out"])
            .arg(p)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let l = lines(&a);
    assert_eq!(l[0], format!("# seed=11 version={}", env!("CARGO_PKG_VERSION")));
    assert_eq!(
        l[1],
        "ratio,lambda_rel,n_qubits,temperature,entropy_S,corr_C,squeeze_sp1,alpha_cond,e0,\
         gap1,gap2,gap3,gap4,gap5,gap6,gap7,gap8,gap9,gap10,n_max_used,converged"
    );
    assert_eq!(l.len(), 6);
    let first = |name: &str| column(&l, name)[0].parse::<f64>().unwrap();
    assert!(first("entropy_S").abs() < 1e-12);
    assert!(first("corr_C").abs() < 1e-12);
    assert!((first("squeeze_sp1") - 1.0).abs() < 1e-12);
    assert!(column(&l, "converged").iter().all(|c| c == "true"));
}

#[test]
fn unconverged_points_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.csv");
    let st = rabi()
        .args(["sweep", "--ratio", "1e-3", "--lambda-rel", "0.99:0.99:1", "--n-max", "8", "--max-rounds", "1", "--out"])
        .arg(&p)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    assert_eq!(column(&lines(&p), "converged"), vec!["false"]);
}

#[test]
fn jsonl_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("o.jsonl");
    let st = rabi()
        .args(["sweep", "--ratio", "0.1", "--lambda-rel", "0.5:1.5:2", "--format", "jsonl", "--out"])
        .arg(&p)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let l = lines(&p);
    assert_eq!(l.len(), 2);
    let v: serde_json::Value = serde_json::from_str(&l[1]).unwrap();
    assert_eq!(v["lambda_rel"], 1.5);
    assert!(v["entropy_S"].as_f64().unwrap() > 0.0);
    assert_eq!(v["gaps"].as_array().unwrap().len(), 10);
}

#[test]
fn slope_appends_columns() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("s.csv");
    let out = dir.path().join("slope.csv");
    let st = rabi()
        .args(["sweep", "--ratio", "1e-3", "--lambda-dist-log", "-2:-1:5", "--out"])
        .arg(&sweep)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let st = rabi().args(["slope", "--input"]).arg(&sweep).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let l = lines(&out);
    assert_eq!(l[0], lines(&sweep)[0]);
    assert!(l[1].ends_with(",log_distance,log_entropy,slope_S"));
    let slopes = column(&l, "slope_S");
    assert_eq!(slopes[0], "NaN");
    assert_eq!(slopes[4], "NaN");
    for s in &slopes[1..4] {
        let v: f64 = s.parse().unwrap();
        assert!(v > 0.0 && v < 2.0, "{v}");
    }
}

#[test]
fn thermal_rows_per_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let st = rabi()
        .args(["thermal", "--ratio", "0.1", "--lambda-rel", "1.5:1.5:1", "--temperature", "0,0.2", "--out"])
        .arg(&p)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let l = lines(&p);
    assert_eq!(column(&l, "temperature"), vec!["0.0", "0.2"]);
    let c: Vec<f64> = column(&l, "corr_C").iter().map(|v| v.parse().unwrap()).collect();
    assert!(c[1] <= c[0]);
}

#[test]
fn spectrum_levels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sp.csv");
    let st = rabi()
        .args(["spectrum", "--ratio", "0.1", "--lambda-rel", "0:1:2", "--levels", "4", "--out"])
        .arg(&p)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let l = lines(&p);
    assert_eq!(l[1], "ratio,lambda_rel,n_qubits,level,energy,parity,n_max_used,converged");
    assert_eq!(l.len(), 2 + 8);
    let e: Vec<f64> = column(&l, "energy").iter().map(|v| v.parse().unwrap()).collect();
    // decoupled: −Δ/2 + kω0 and Δ/2 + kω0
    assert!((e[0] + 0.5).abs() < 1e-12 && (e[1] + 0.4).abs() < 1e-12);
    assert!(e[4..].windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn semiclassical_to_stdout() {
    let out = rabi()
        .args(["semiclassical", "--ratio", "1e-3", "--lambda-rel", "0.5:1.5:3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let l: Vec<&str> = text.lines().collect();
    assert_eq!(l.len(), 5);
    assert!(l[2].contains(",below,"));
    assert!(l[3].contains(",at,"));
    assert!(l[4].contains(",above,"));
}
