use std::path::Path;
use std::process::{Command, Output};

use uhlmann_cli::summary::{summarize, Record};
use uhlmann_cli::{parse_scan, run_scan, CliError, Table};

fn uhlmann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhlmann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scan(args: &str) -> Table {
    let argv = std::iter::once("uhlmann").chain(args.split_whitespace());
    run_scan(&parse_scan(argv).unwrap()).unwrap()
}

fn values(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap().into_iter().map(Option::unwrap).collect()
}

#[test]
fn delta_vanishes_for_temperature_probes() {
    let t = scan("delta-scan --model kitaev --param mu=0.2:1.8:17 --temp 0.01:1:9 --dtemp 0.01 --nk 301");
    assert_eq!(t.rows.len(), 17 * 9);
    assert_eq!(t.failed, 0);
    assert!(values(&t, "delta").iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn delta_is_positive_for_parameter_probes() {
    let t = scan("delta-scan --model ssh --param v=0.5:0.9:5 --temp 0.2 --dparam 0.05 --nk 301");
    assert!(values(&t, "delta").iter().all(|&d| d > 0.0));
}

#[test]
fn fidelity_scan_dips_at_the_critical_point() {
    let t = scan("fidelity-scan --model creutz --param M=0.5:1.5:41 --temp 0.01 --dparam 0.01 --nk 401");
    let (p, f) = (values(&t, "param"), values(&t, "F"));
    let i = (0..f.len()).min_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    assert!((p[i] - 1.0).abs() <= 0.025 + 1e-12, "argmin {}", p[i]);
    assert!(f.iter().all(|&x| x > 0.0 && x <= 1.0));
}

#[test]
fn gap_curve_decreases_and_closes() {
    let t = scan("gap-curve --set V=0.3 --temp 0.005:0.06:12");
    let gap = values(&t, "gap");
    assert!(gap.windows(2).all(|w| w[1] <= w[0]));
    assert!(gap[0] > 0.0);
    assert_eq!(*gap.last().unwrap(), 0.0);
    let report = summarize(&t.to_csv_string(), 1e-12).unwrap();
    assert!(report.iter().any(|r| matches!(r, Record::GapClosing { t_below, t_above }
        if *t_below < 0.0405 && *t_above > 0.0405)));
}

#[test]
fn holonomy_scan_reports_winding() {
    let t = scan("holonomy-scan --model creutz --param M=0.3:1.5:5 --temp 0.001");
    assert_eq!(values(&t, "winding"), vec![1.0, 1.0, 1.0, 0.0, 0.0]);

    let gapless = scan("holonomy-scan --model creutz --param M=1 --temp 0.1");
    assert_eq!(gapless.failed, 1);
}

#[test]
fn edge_profile_lists_every_cell() {
    let t = scan("edge-scan --model ssh --param v=0.2 --temp 0.01 --sites 20 --profile");
    assert_eq!(t.rows.len(), 20);
    assert_eq!(values(&t, "site"), (0..20).map(f64::from).collect::<Vec<_>>());
    let n = values(&t, "n");
    assert!((n[10] - 1.0).abs() < 1e-9, "{n:?}");
    assert!((0..20).all(|i| (n[i] - n[19 - i]).abs() < 1e-12));
}

#[test]
fn worker_count_does_not_change_output() {
    let base = "bcs-scan --param V=0.2:0.4:4 --temp 0.01:0.08:5 --dparam 0.001 --shell-nodes 64";
    let one = scan(&format!("{base} --workers 1")).to_csv_string();
    let four = scan(&format!("{base} --workers 4")).to_csv_string();
    assert_eq!(one, four);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.conf");
    std::fs::write(&cfg, "# probe\nmodel = ssh\nparam = v=0.2:0.8:4\ntemp = 0.1\ndparam = 0.01\nnk = 101\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = scan(&format!("fidelity-scan --config {cfg}"));
    assert_eq!(from_file.rows.len(), 4);
    let overridden = scan(&format!("fidelity-scan --config {cfg} --param v=0.2:0.8:7"));
    assert_eq!(overridden.rows.len(), 7);

    std::fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let bad = dir.path().join("bad.conf");
    let argv = ["uhlmann", "fidelity-scan", "--config", bad.to_str().unwrap()];
    assert!(matches!(parse_scan(argv), Err(CliError::InvalidSpec(_))));
}

#[test]
fn writes_csv_to_out_and_summarizes_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let run = uhlmann(&[
        "phase-scan",
        "--model",
        "creutz",
        "--set",
        "M=0.5",
        "--temp",
        "0.05:1.5:30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("T,theta,phase,trace,error\n"));

    let report = uhlmann(&["summarize", out.to_str().unwrap(), "--format", "jsonl"]);
    assert!(report.status.success());
    let lines: Vec<String> = String::from_utf8(report.stdout)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    let rec: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(rec["kind"], "phase_step");
    let t_u = rec["t_u"].as_f64().unwrap();
    assert!(t_u > 0.5 && t_u < 0.8, "{t_u}");
}

#[test]
fn exit_codes() {
    assert_eq!(uhlmann(&["fidelity-scan", "--model", "graphene"]).status.code(), Some(2));
    assert_eq!(
        uhlmann(&["gap-curve", "--model", "creutz", "--temp", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(uhlmann(&["summarize", "/nonexistent/scan.csv"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing").join("out.csv");
    let io = uhlmann(&["gap-curve", "--temp", "0.01", "--out", blocked.to_str().unwrap()]);
    assert_eq!(io.status.code(), Some(3));

    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "a,b\n1,2\n").unwrap();
    assert_eq!(uhlmann(&["summarize", junk.to_str().unwrap()]).status.code(), Some(2));

    // every cell sits on the gap closing of the SSH chain
    let failed = uhlmann(&[
        "holonomy-scan",
        "--model",
        "ssh",
        "--param",
        "v=1",
        "--temp",
        "0:0:1",
        "--nk",
        "101",
    ]);
    assert_eq!(failed.status.code(), Some(4), "{}", String::from_utf8_lossy(&failed.stdout));
    let stdout = String::from_utf8(failed.stdout).unwrap();
    let row = stdout.lines().nth(1).unwrap();
    assert!(!row.rsplit(',').next().unwrap().is_empty(), "{row}");
}

#[test]
fn csv_round_trips_floats() {
    let t = scan("bcs-scan --param V=0.3 --temp 0.01:0.03:3 --dtemp 0.001 --shell-nodes 32");
    let text = t.to_csv_string();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bcs.csv");
    std::fs::write(&path, &text).unwrap();
    let mut reader = csv::Reader::from_path(Path::new(&path)).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for (row, orig) in rows.iter().zip(&t.rows) {
        let parsed: f64 = row[4].parse().unwrap();
        assert_eq!(parsed.to_string(), orig[4].parse::<f64>().unwrap().to_string());
    }
}
