use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn phasedisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasedisc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = phasedisc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn hex(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn coherent_curve_matches_closed_form() {
    let csv = stdout_ok(&[
        "curve",
        "--probe",
        "coherent",
        "--m",
        "2",
        "--ns",
        "0.01:1:50",
    ]);
    let mut lines = csv.lines();
    let manifest = lines.next().unwrap();
    assert!(manifest.starts_with("# manifest: "));
    assert_eq!(lines.next().unwrap(), "n_s,p_error");
    let data = rows(&csv);
    assert_eq!(data.len(), 50);
    for r in &data {
        let expected = (1.0 - (1.0 - (-4.0 * r[0]).exp()).sqrt()) / 2.0;
        assert!((r[1] - expected).abs() < 1e-9);
    }
    assert!(data.windows(2).all(|w| w[0][0] < w[1][0]));
    for line in csv.lines().skip(2) {
        for field in line.split(',') {
            let mantissa = field
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(mantissa.len(), 17, "{field}");
        }
    }
}

#[test]
fn manifest_digest_covers_the_body() {
    let csv = stdout_ok(&[
        "curve",
        "--probe",
        "tmsv",
        "--j",
        "15",
        "--m",
        "8",
        "--ns",
        "0.1:3.5:20",
    ]);
    let (head, body) = csv.split_once('\n').unwrap();
    let manifest: Value = serde_json::from_str(head.trim_start_matches("# manifest: ")).unwrap();
    assert_eq!(manifest["command"], "curve");
    assert_eq!(manifest["params"]["j"], 15);
    assert_eq!(manifest["sha256"], hex(body.as_bytes()));
    for r in rows(&csv) {
        assert!((0.0..=1.0 - 1.0 / 8.0).contains(&r[1]));
    }
}

#[test]
fn optimal_curve_reaches_zero() {
    let csv = stdout_ok(&[
        "curve",
        "--probe",
        "optimal",
        "--m",
        "8",
        "--ns",
        "0.1:3.5:50",
    ]);
    let data = rows(&csv);
    assert!(data.last().unwrap()[1] < 1e-8);
}

#[test]
fn truncated_family_reports_a_band() {
    let csv = stdout_ok(&["curve", "--probe", "ecs", "--m", "4", "--ns", "0.6:2:5"]);
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "n_s,p_error,p_error_lo,p_error_hi"
    );
    for r in rows(&csv) {
        assert!(r[2] <= r[1] + 1e-12 && r[1] <= r[3] + 1e-12);
    }
}

#[test]
fn squeezed_and_pcs_curves_run() {
    for probe in ["squeezed", "pcs", "uniform"] {
        let csv = stdout_ok(&["curve", "--probe", probe, "--m", "3", "--ns", "0.2:1.2:6"]);
        assert_eq!(rows(&csv).len(), 6);
    }
}

#[test]
fn optimal_json_report() {
    let text = stdout_ok(&["optimal", "--m", "2", "--ns", "0.25"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    for key in ["a", "b", "pfrak", "p_error", "residual", "manifest"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let pfrak: Vec<f64> = serde_json::from_value(v["pfrak"].clone()).unwrap();
    assert!((pfrak[0] - 0.75).abs() < 1e-9 && (pfrak[1] - 0.25).abs() < 1e-9);
    assert!((v["p_error"].as_f64().unwrap() - 0.0669873).abs() < 1e-7);
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);

    let v: Value = serde_json::from_str(&stdout_ok(&["optimal", "--m", "5", "--ns", "2"])).unwrap();
    assert_eq!(v["p_error"].as_f64().unwrap(), 0.0);
    assert!(v["pfrak"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| (p.as_f64().unwrap() - 0.2).abs() < 1e-15));
}

#[test]
fn optimal_csv_report() {
    let csv = stdout_ok(&["optimal", "--m", "3", "--ns", "0.4", "--format", "csv"]);
    assert_eq!(csv.lines().nth(1).unwrap(), "quantity,index,value");
    assert_eq!(csv.lines().filter(|l| l.starts_with("pfrak,")).count(), 3);
}

#[test]
fn usage_errors_are_single_lines() {
    for args in [
        vec!["optimal", "--m", "2", "--ns", "0"],
        vec!["curve", "--probe", "laser", "--m", "2", "--ns", "0.1:1:3"],
        vec![
            "curve", "--probe", "coherent", "--m", "1", "--ns", "0.1:1:3",
        ],
        vec![
            "curve", "--probe", "coherent", "--m", "4", "--ns", "1:0.1:3",
        ],
        vec![
            "simulate-bpsk",
            "--ns",
            "0.5",
            "--eta-s",
            "1.2",
            "--seed",
            "1",
        ],
        vec!["bogus"],
    ] {
        let out = phasedisc(&args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error["), "{err}");
        assert!(out.stdout.is_empty());
    }
}

fn optimum_trailer(csv: &str) -> std::collections::HashMap<String, String> {
    let line = csv
        .lines()
        .find(|l| l.starts_with("# optimum: "))
        .expect("optimum trailer");
    line.trim_start_matches("# optimum: ")
        .split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn squeeze_scan_optima() {
    let two = optimum_trailer(&stdout_ok(&["squeeze-scan", "--m", "2", "--ns", "0.5"]));
    let nu: f64 = two["nu"].parse().unwrap();
    assert!((nu - 0.3535534).abs() < 1e-4);
    assert_eq!(two["sign"], "1");

    let eight = optimum_trailer(&stdout_ok(&["squeeze-scan", "--m", "8", "--ns", "1"]));
    assert_eq!(eight["sign"], "-1");

    // The M=4 optimum at unit energy is a very slightly phase-squeezed state
    // whose gain over the coherent probe is below 1e-4.
    let four = optimum_trailer(&stdout_ok(&["squeeze-scan", "--m", "4", "--ns", "1"]));
    let nu: f64 = four["nu"].parse().unwrap();
    assert!(nu.abs() < 0.02);
}

#[test]
fn squeeze_scan_table_shape() {
    let csv = stdout_ok(&["squeeze-scan", "--m", "3", "--ns", "1", "--points", "9"]);
    assert_eq!(csv.lines().nth(1).unwrap(), "f,sign,p_error");
    let data: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(data.len(), 18);
}

#[test]
fn bpsk_runs_are_byte_identical() {
    let args = [
        "simulate-bpsk",
        "--ns",
        "0.25",
        "--eta-s",
        "1",
        "--eta-i",
        "1",
        "--eta-d0",
        "1",
        "--eta-d1",
        "1",
        "--trials",
        "1000000",
        "--seed",
        "7",
    ];
    let first = stdout_ok(&args);
    assert_eq!(first, stdout_ok(&args));
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["manifest"]["seed"], 7);
    let band = &v["bands"]["p_error_given_click"];
    assert_eq!(band["pass"], true);
    assert!((band["predicted"].as_f64().unwrap() - 0.0669873).abs() < 1e-7);
}

#[test]
fn bpsk_lossless_half_split_has_no_errors() {
    let text = stdout_ok(&[
        "simulate-bpsk",
        "--ns",
        "0.5",
        "--trials",
        "200000",
        "--seed",
        "11",
    ]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["empirical"]["errors"], 0);
    assert_eq!(v["pass"], true);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let args = [
        "curve", "--probe", "coherent", "--m", "4", "--ns", "0.1:2:7",
    ];
    let printed = stdout_ok(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert!(stdout_ok(&with_out).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}
