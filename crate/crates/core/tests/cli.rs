//! End-to-end runs of the `dataqos` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dataqos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dataqos")).args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// (curve, threshold, value) rows of a CSV document.
fn rows(csv: &str) -> Vec<(String, f64, f64)> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("curve,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

fn labels(csv: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (label, _, _) in rows(csv) {
        if out.last() != Some(&label) {
            out.push(label);
        }
    }
    out
}

#[test]
fn dor_fig2_both_methods() {
    let o = dataqos(&["dor", "--preset", "fig2", "--h-bits", "20000", "--method", "both", "--trials", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# avg-snr-db = 10\n") && text.contains("# bw-hz = 200000\n") && text.contains("# h-bits = 20000\n"));
    assert_eq!(labels(&text), ["cra-h20000-l1-closed", "cra-h20000-l1-mc", "opra-h20000-l1-closed", "opra-h20000-l1-mc"]);
    let r = rows(&text);
    assert_eq!(r.len(), 4 * 181);
    assert_eq!(r[0].1, 1e-3);
    assert_eq!(r[180].1, 1.0);
}

#[test]
fn dor_explicit_threshold_value() {
    let o = dataqos(&["dor", "--avg-snr-db", "10", "--h-bits", "20000", "--thresholds", "0.05", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert!((r[0].2 - 0.2591817793).abs() < 1e-9);
}

#[test]
fn dor_fig3_branches() {
    let o = dataqos(&["dor", "--preset", "fig3", "--branches", "1,2,5,10,15", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(labels(&text).len(), 5);
    assert!(text.contains("# avg-snr-db = 20\n") && text.contains("# h-bits = 5000\n"));
}

#[test]
fn eor_fig4_columns_and_saturation() {
    let o = dataqos(&["eor", "--preset", "fig4", "--gamma-c-db", "10", "--pmax-w", "1", "--trials", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(",closed_form,") && text.contains(",monte_carlo,"));
    let high = dataqos(&["eor", "--preset", "fig4", "--gamma-c-db", "10", "--pmax-w", "1", "--thresholds", "0.08,0.1,1"]);
    assert_eq!(high.status.code(), Some(0));
    assert!(rows(&stdout(&high)).iter().all(|r| r.2 == 0.0));
}

#[test]
fn configuration_errors_exit_2() {
    let cases: [&[&str]; 7] = [
        &["eor", "--preset", "fig4", "--gamma-c-db", "10"],
        &["dor", "--preset", "fig2", "--thresholds", ""],
        &["wait", "--preset", "fig5", "--gamma-c-db", "10", "--pmax-w", "1", "--trials", "0"],
        &["dor", "--preset", "fig4"],
        &["dor", "--avg-snr", "10", "--avg-snr-db", "10", "--h-bits", "1"],
        &["dor", "--preset", "fig2", "--format", "xml"],
        &["dor", "--preset", "fig2", "--plot"],
    ];
    for args in cases {
        let o = dataqos(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn wait_fig5_is_deterministic_and_reports_delivery() {
    let args = ["wait", "--preset", "fig5", "--gamma-c-db", "10", "--pmax-w", "1", "--trials", "20000", "--seed", "7", "--h-bits", "50000"];
    let a = dataqos(&args);
    let b = dataqos(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let names = labels(&text);
    assert!(names.iter().any(|l| l.starts_with("wait-mc")) && names.iter().any(|l| l.starts_with("wait-lcr")));
    assert!(names.iter().any(|l| l.starts_with("delivery-mc")) && names.iter().any(|l| l.starts_with("delivery-lcr")));
    let first_mc = rows(&text).into_iter().find(|r| r.0.starts_with("wait-mc")).unwrap();
    assert_eq!(first_mc.1, 0.0);
    assert!((first_mc.2 - (-2.0f64).exp()).abs() < 0.01);
}

#[test]
fn censoring_dominated_wait_exits_3() {
    let o = dataqos(&["wait", "--preset", "fig5", "--gamma-c-db", "10", "--pmax-w", "1", "--trials", "2000", "--cap-s", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("censored="));
}

#[test]
fn solve_examples() {
    let o = dataqos(&["solve", "--find", "branches", "--avg-snr-db", "20", "--h-bits", "5000", "--t-th-s", "0.01", "--target", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\nvalue = 7\n"));

    let o = dataqos(&["solve", "--find", "avg-snr", "--c", "2", "--target", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let db: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("value_db = ")).unwrap().parse().unwrap();
    assert!((db - 24.75).abs() < 0.005);

    let o = dataqos(&["solve", "--find", "branches", "--avg-snr-db", "20", "--h-bits", "5000", "--t-th-s", "0.001", "--target", "1e-9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("saturates at 1"));
}

#[test]
fn json_embeds_resolved_config() {
    let o = dataqos(&["dor", "--preset", "fig2", "--h-bits", "5000", "--method", "closed", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["preset"], "fig2");
    assert_eq!(doc["config"]["h-bits"], "5000");
    assert_eq!(doc["curves"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_sits_between_preset_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("scenario.conf");
    std::fs::write(&conf, "# lower SNR than the preset\navg-snr-db = 5\nh-bits = 1000\nmethod = closed\n").unwrap();
    let c = conf.to_str().unwrap();
    let o = dataqos(&["dor", "--preset", "fig2", "--config", c, "--h-bits", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# avg-snr-db = 5\n") && text.contains("# h-bits = 2000\n"));

    std::fs::write(&conf, "avg-snr-db = 5\nfrobnicate = 1\n").unwrap();
    assert_eq!(dataqos(&["dor", "--preset", "fig2", "--config", c]).status.code(), Some(2));
}

#[test]
fn plot_and_trace_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eor.csv");
    let o = dataqos(&["eor", "--preset", "fig4", "--gamma-c-db", "10", "--pmax-w", "1", "--method", "closed", "--plot", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("# "));
    assert!(std::fs::read_to_string(dir.path().join("eor.svg")).unwrap().contains("<polyline"));

    let trace = dir.path().join("trace.csv");
    let o = dataqos(&[
        "wait", "--preset", "fig5", "--gamma-c", "10", "--pmax-w", "1", "--trials", "100",
        "--trace-out", trace.to_str().unwrap(), "--trace-duration-s", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(Path::new(&trace)).unwrap();
    assert!(text.starts_with("t_s,gain\n"));
    assert_eq!(text.lines().count(), 1 + 801);
}

#[test]
fn amc_strategy_runs_by_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("amc.conf");
    std::fs::write(&scheme, "modes = 4, 16, 64, 256\nber.critical-mtc = 1e-6\nber.mbb = 1e-3\n").unwrap();
    let o = dataqos(&[
        "dor", "--avg-snr-db", "20", "--h-bits", "5000", "--strategy", "amc", "--amc-scheme", scheme.to_str().unwrap(),
        "--traffic-class", "mbb", "--trials", "20000", "--thresholds", "0.001,0.01,0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(labels(&stdout(&o)), ["amc-h5000-l1-mc"]);
    let o = dataqos(&[
        "dor", "--avg-snr-db", "20", "--h-bits", "5000", "--strategy", "amc", "--amc-scheme", scheme.to_str().unwrap(),
        "--traffic-class", "massive-mtc",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
