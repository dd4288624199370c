use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn twoam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoam")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    twoam(&args)
}

fn metric(report: &str, name: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("no {name} in report"))
        .parse()
        .unwrap()
}

#[test]
fn simulate_writes_trace_and_report_with_provenance() {
    let tmp = TempDir::new().unwrap();
    let out = simulate(tmp.path(), &["--ops", "400", "--seed", "11", "--replicas", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# twoam trace config="));
    assert!(first.contains(" seed=11"));
    assert_eq!(
        lines.next().unwrap(),
        "op_id,client_id,kind,key,version,invoke_time_s,response_time_s"
    );
    let row = lines.next().unwrap();
    let invoke = row.split(',').nth(5).unwrap();
    assert!(invoke.split('.').nth(1).unwrap().len() >= 9);

    let report = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert!(report.starts_with("# twoam report config="));
    for name in ["p_cp", "p_rwp_given_cp", "p_oni", "violations_2atomicity"] {
        metric(&report, name);
    }
    assert_eq!(metric(&report, "violations_2atomicity"), 0.0);
    assert_eq!(metric(&report, "replicas"), 3.0);
}

#[test]
fn same_seed_gives_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(
            code(&simulate(dir.path(), &["--ops", "300", "--seed", "4", "--keys", "3"])),
            0
        );
    }
    for file in ["trace.csv", "report.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn zero_ops_gives_empty_trace_and_flagged_report() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&simulate(tmp.path(), &["--ops", "0"])), 0);
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    let report = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert_eq!(metric(&report, "empty"), 1.0);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# small run\nreplicas=3\nclients=4\nops=50\nseed=1\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = twoam(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--seed",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let first = trace.lines().next().unwrap();
    assert!(first.contains("seed=2") && first.contains("replicas=3") && first.contains("clients=4"));
}

#[test]
fn config_and_usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "replicas=5\nflavour=mint\n").unwrap();
    assert_eq!(code(&twoam(&["--config", cfg.to_str().unwrap(), "simulate"])), 2);
    assert_eq!(code(&twoam(&["simulate", "--replicas", "0"])), 2);
    assert_eq!(code(&twoam(&["simulate", "--protocol", "paxos"])), 2);
    assert_eq!(code(&twoam(&["simulate", "--async-ms", "10", "--fixed-ms", "5"])), 2);
    assert_eq!(code(&twoam(&["simulate", "--crash", "nonsense"])), 2);
    assert_eq!(code(&twoam(&["frobnicate"])), 2);
    assert_eq!(code(&twoam(&["theory", "--replicas", "1"])), 2);
}

#[test]
fn theory_default_grid_and_single_point() {
    let out = twoam(&["theory"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# twoam theory config="));
    assert_eq!(text.lines().count(), 2 + 14);
    let five = text.lines().find(|l| l.starts_with("5,5,")).unwrap();
    let p_cp: f64 = five.split(',').nth(8).unwrap().parse().unwrap();
    assert!((p_cp - 0.781222).abs() < 1e-6);

    let out = twoam(&["theory", "--replicas", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(2).unwrap();
    assert!(row.starts_with("2,2,2,1,"));
    assert_eq!(row.rsplit(',').next().unwrap(), "0");
}

#[test]
fn theory_refuses_negative_lag_without_force() {
    let args = ["theory", "--replicas", "3", "--rate", "1", "--service-rate", "10"];
    assert_eq!(code(&twoam(&args)), 2);
    let mut forced = args.to_vec();
    forced.push("--force");
    let out = twoam(&forced);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("clamped"));
}

#[test]
fn check_accepts_own_trace_and_flags_a_stale_read() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&simulate(tmp.path(), &["--ops", "200"])), 0);
    let trace = tmp.path().join("trace.csv");
    assert_eq!(code(&twoam(&["check", trace.to_str().unwrap()])), 0);

    let stale = tmp.path().join("stale.csv");
    fs::write(
        &stale,
        "op_id,client_id,kind,key,version,invoke_time_s,response_time_s\n\
         0,0,W,0,1,0.000000000,1.000000000\n\
         1,0,W,0,2,2.000000000,3.000000000\n\
         2,0,W,0,3,4.000000000,5.000000000\n\
         3,1,R,0,1,6.000000000,7.000000000\n",
    )
    .unwrap();
    let out = twoam(&["check", stale.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("op 3"));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(metric(&report, "staleness_2"), 1.0);
}

#[test]
fn check_reports_malformed_rows_by_line() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(
        &bad,
        "op_id,client_id,kind,key,version,invoke_time_s,response_time_s\n0,0,W,0,1,0.1,0.2\n1,1,Q,0,1,0.3,0.4\n",
    )
    .unwrap();
    let out = twoam(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn compare_reports_deltas_and_errors() {
    let tmp = TempDir::new().unwrap();
    let theory = tmp.path().join("theory.csv");
    assert_eq!(
        code(&twoam(&["theory", "--sizes", "3-5", "--out", theory.to_str().unwrap()])),
        0
    );
    let run = tmp.path().join("run");
    assert_eq!(code(&simulate(&run, &["--ops", "300"])), 0);
    let report = run.join("report.csv");

    let out = twoam(&["compare", theory.to_str().unwrap(), report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# twoam comparison config="));
    assert!(text.contains("5,5,p_cp,0.78122"));

    let partial = tmp.path().join("partial.csv");
    fs::write(
        &partial,
        "metric,value\nclients,5\nreplicas,5\np_cp,0.7812223434448242\n",
    )
    .unwrap();
    let out = twoam(&["compare", theory.to_str().unwrap(), partial.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "p_rwp_given_cp is missing");
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_rwp_given_cp"));

    let seven = tmp.path().join("seven.csv");
    fs::write(
        &seven,
        "metric,value\nclients,7\nreplicas,7\np_cp,0.5\np_rwp_given_cp,0\np_oni,0\n",
    )
    .unwrap();
    assert_eq!(
        code(&twoam(&["compare", theory.to_str().unwrap(), seven.to_str().unwrap()])),
        2
    );
}

#[test]
fn compare_identical_values_gives_zero_deltas() {
    let tmp = TempDir::new().unwrap();
    let theory = tmp.path().join("theory.csv");
    assert_eq!(
        code(&twoam(&[
            "theory",
            "--replicas",
            "5",
            "--out",
            theory.to_str().unwrap()
        ])),
        0
    );
    let text = fs::read_to_string(&theory).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let report = tmp.path().join("report.csv");
    fs::write(
        &report,
        format!(
            "metric,value\nclients,5\nreplicas,5\np_cp,{}\np_rwp_given_cp,{}\np_oni,{}\n",
            row[8], row[10], row[11]
        ),
    )
    .unwrap();
    let out = twoam(&[
        "compare",
        theory.to_str().unwrap(),
        report.to_str().unwrap(),
        "--tol",
        "0",
    ]);
    assert_eq!(code(&out), 0);
    for line in String::from_utf8(out.stdout).unwrap().lines().skip(2) {
        assert!(line.ends_with(",0,0"), "{line}");
    }
}

#[test]
fn latency_orders_protocols() {
    let out = twoam(&["latency", "--ops", "300", "--fixed-ms", "10", "--processing-us", "0"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let p50 = |source: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{source},R,"))).unwrap();
        line.split(',').nth(4).unwrap().parse().unwrap()
    };
    assert!((p50("2am") - 0.02).abs() < 1e-9);
    assert!((p50("abd") - 0.04).abs() < 1e-9);
    assert_eq!(
        code(&twoam(&["latency", "--ops", "300", "--async-ms", "40", "--seed", "9"])),
        0
    );
}
