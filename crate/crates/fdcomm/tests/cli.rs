//! End-to-end runs of the binary plus sweep-engine round trips.

use fdcomm::sweep::*;
use std::process::{Command, Output};

fn fdcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdcomm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn harmonic_oracle_check_passes() {
    let o = fdcomm(&["oracle-check", "--hbar", "0.5", "--beta", "2", "--mu", "1", "--d", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&stdout(&o)).unwrap();
    let check: Vec<_> = rows.iter().filter(|r| r.quantity.starts_with("oracle")).collect();
    assert!(!check.is_empty());
    assert!(check.iter().all(|r| r.pass && r.value < 1e-8));
}

#[test]
fn classical_magnetic_ratio_rows() {
    let o = fdcomm(&["classical", "--beta", "1", "--mu", "0.5", "--b", "0,1,5", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&stdout(&o)).unwrap();
    let ratios: Vec<_> = rows.iter().filter(|r| r.quantity == "magnetic_ratio").collect();
    assert_eq!(ratios.len(), 3);
    for r in ratios {
        let b = r.b.unwrap();
        assert!((r.value - (3.0 + 2.0 * b * b) / 6.0).abs() < 1e-8 * r.value, "b={b}");
        assert!(r.pass);
    }
}

#[test]
fn quantum_point_in_json() {
    let o = fdcomm(&["quantum", "--hbar", "0.25", "--beta", "inf", "--mu", "1", "--d", "2", "--p", "1,inf", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<SweepRow> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rows.iter().all(|r| r.beta == f64::INFINITY));
    assert!(rows.iter().any(|r| r.p == f64::INFINITY));
    assert!(stdout(&o).contains("\"inf\""));
}

#[test]
fn configuration_errors_exit_with_two() {
    let empty = fdcomm(&["quantum", "--beta", "1", "--mu", "1", "--d", "1"]);
    assert_eq!(empty.status.code(), Some(2));
    let field = fdcomm(&["quantum", "--hbar", "0.5", "--beta", "1", "--mu", "1", "--b", "1"]);
    assert_eq!(field.status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("fdcomm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "model = harmonic\nhbar = 0.5\nbeta = 1\nmu = 1\nd = 1\np = 2\nquantities = S_p\nbogus = 3\n").unwrap();
    let o = fdcomm(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("fdcomm-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("grid.cfg");
    let out = dir.join("out.csv");
    std::fs::write(
        &cfg,
        "# small magnetic grid\nmodel = magnetic\nhbar = 0.1\nbeta = 2, inf\nmu = 2\nb = 0, 1\np = 1, 2\nquantities = S_p, I_decomposition\n",
    )
    .unwrap();
    let o = fdcomm(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r.quantity.starts_with("decomposition")));
    assert!(rows.iter().all(|r| r.pass));
    assert!(String::from_utf8_lossy(&o.stderr).contains("# summary"));
}

fn config(text: &str) -> SweepConfig {
    SweepConfig::parse(text).unwrap()
}

#[test]
fn key_value_and_json_configs_agree() {
    let kv = config("model = harmonic\nhbar = 0.5, 0.25\nbeta = 2, inf\nmu = 1\nd = 1, 2\np = 1, 2\nquantities = S_p, K_p\n");
    let js = config(
        r#"{"model": "harmonic", "hbar": [0.5, 0.25], "beta": [2, "inf"], "mu": [1], "d": [1, 2], "p": [1, 2], "quantities": ["S_p", "K_p"]}"#,
    );
    assert_eq!(kv.hbar, js.hbar);
    assert_eq!(kv.beta, js.beta);
    assert_eq!(kv.quantities, js.quantities);
    assert_eq!(grid(&kv.clone().validate().unwrap()).len(), 16);
}

#[test]
fn empty_grids_are_rejected() {
    let c = config("model = harmonic\nhbar = 0.5\nbeta = 2\nmu = 1\nd = 1\np = 2\nquantities = S_p\n");
    let mut empty = c.clone();
    empty.mu.clear();
    assert!(matches!(run(&empty), Err(ConfigError::EmptyGrid(_))));
    let mut no_q = c;
    no_q.quantities.clear();
    assert!(run(&no_q).is_err());
}

#[test]
fn csv_and_json_round_trip_exactly() {
    let c = config("model = harmonic\nhbar = 0.3\nbeta = 0.7, inf\nmu = 1.1\nd = 2\np = 1.5, inf\nquantities = S_p, K_p\n");
    let report = run(&c).unwrap();
    let mut csv = Vec::new();
    emit(&report.rows, Format::Csv, &mut csv).unwrap();
    assert_eq!(parse_csv(std::str::from_utf8(&csv).unwrap()).unwrap(), report.rows);
    let mut json = Vec::new();
    emit(&report.rows, Format::Json, &mut json).unwrap();
    let back: Vec<SweepRow> = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, report.rows);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let base = "model = classical\nhbar = 1\nbeta = 0.5, 2\nmu = -0.5, 1\nd = 1, 2\np = 1, 2\nquantities = S_p, oracle_check\nmc_samples = 4000\nseed = 17\n";
    let one = run(&config(&format!("{base}workers = 1\n"))).unwrap();
    let three = run(&config(&format!("{base}workers = 3\n"))).unwrap();
    assert_eq!(one.rows, three.rows);
    let again = run(&config(&format!("{base}workers = 3\n"))).unwrap();
    assert_eq!(again.rows, three.rows);
    let other = run(&config(&base.replace("seed = 17", "seed = 18"))).unwrap();
    assert_ne!(other.rows, one.rows);
}
