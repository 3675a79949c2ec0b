use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tops"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn sample(name: &str) -> PathBuf {
    repo().join("data/sample").join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap_or(-1),
        String::from_utf8_lossy(&stdout).into_owned(),
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

fn analyze(out: &Path) -> (i32, String, String) {
    run(bin()
        .arg("analyze")
        .arg("--vix")
        .arg(sample("vix.csv"))
        .arg("--futures")
        .arg(sample("futures.csv"))
        .arg("--sweep-windows")
        .arg("--out")
        .arg(out))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn analyze_sample_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let clock = Instant::now();
    let (code, stdout, stderr) = analyze(dir.path());
    assert_eq!(code, 0, "{stderr}");
    assert!(clock.elapsed().as_secs() < 30);
    let names: Vec<String> = read_dir_sorted(dir.path()).into_iter().map(|f| f.0).collect();
    for expected in [
        "ensemble.csv",
        "lead_lag_path.csv",
        "phase_histograms.csv",
        "phases.csv",
        "returns.csv",
        "self_consistency.csv",
        "self_consistency_sweep.csv",
        "significance_mask.csv",
        "spliced_futures.csv",
    ] {
        assert!(names.iter().any(|n| n == expected), "{expected} missing");
    }
    for (name, body) in read_dir_sorted(dir.path()) {
        let text = String::from_utf8(body).unwrap();
        assert!(text.starts_with("# config: command=analyze"), "{name}");
    }
    let path = fs::read_to_string(dir.path().join("lead_lag_path.csv")).unwrap();
    assert_eq!(
        path.lines().nth(1).unwrap(),
        "date,lag_days,member_i1,member_i2,free_energy_per_step"
    );
    let ensemble = fs::read_to_string(dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(ensemble.lines().count(), 2 + 31 * 31);
    assert!(stdout.contains("phase3"));
}

#[test]
fn analyze_is_byte_for_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(analyze(a.path()).0, 0);
    assert_eq!(analyze(b.path()).0, 0);
    assert_eq!(read_dir_sorted(a.path()), read_dir_sorted(b.path()));
}

#[test]
fn missing_futures_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let (code, _, stderr) = run(bin()
        .arg("analyze")
        .arg("--vix")
        .arg(sample("vix.csv"))
        .arg("--futures")
        .arg(&missing)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert_eq!(code, 2);
    assert!(stderr.contains("nope.csv"), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_row_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("vix.csv");
    fs::write(&bad, "date,close\n2010-03-01,20\n2010-03-02,-1\n").unwrap();
    let (code, _, stderr) = run(bin()
        .arg("stats")
        .arg("--vix")
        .arg(&bad)
        .arg("--futures")
        .arg(fixture("ten_futures.csv"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 2);
    assert!(stderr.contains("non-positive price at row 3"), "{stderr}");
}

#[test]
fn failed_analysis_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, _, stderr) = run(bin()
        .arg("analyze")
        .arg("--vix")
        .arg(sample("vix.csv"))
        .arg("--futures")
        .arg(sample("futures.csv"))
        .args(["--margin", "2", "--window", "100"])
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("window 100"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn stats_on_ten_rows_match_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(bin()
        .arg("stats")
        .arg("--vix")
        .arg(fixture("ten_vix.csv"))
        .arg("--futures")
        .arg(fixture("ten_futures.csv"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{stderr}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    // numpy/scipy on the log returns of the fixture prices.
    let expected = [
        ("VIX", 0.00957529958233917, 0.0806877386419532, 0.010038048200936792, 1.366515754035602, 1.0007526867977306, 0.6063024388500424),
        ("VXFC", 0.006174427906090092, 0.062238988801273314, -0.11209334655753982, 1.3524914498051404, 1.0367040361256412, 0.5955011148508628),
        ("VXFS", 0.006409568704186963, 0.05862450997625579, -0.05306999178004446, 1.2978195292723254, 1.090756519138809, 0.5796224941132964),
    ];
    let rows = json["panel_a"].as_array().unwrap();
    for (row, (name, mean, std, skew, kurt, jb, jbp)) in rows.iter().zip(expected) {
        assert_eq!(row["series"], name);
        assert_eq!(row["n_prices"], 10);
        let s = &row["summary"];
        let close = |v: &serde_json::Value, want: f64| (v.as_f64().unwrap() - want).abs() < 1e-12;
        assert!(close(&s["mean"], mean), "{name} mean");
        assert!(close(&s["std_dev"], std), "{name} std");
        assert!(close(&s["skewness"], skew), "{name} skew");
        assert!(close(&s["kurtosis"], kurt), "{name} kurt");
        assert!(close(&row["jarque_bera"]["statistic"], jb), "{name} jb");
        assert!(close(&row["jarque_bera"]["p_value"], jbp), "{name} jb p");
        assert!(row["adf_constant"].is_null(), "too short for ADF");
    }
    let corr = &json["correlation"];
    let want = [(0, 1, 0.9377141343217047), (0, 2, 0.955477134760019), (1, 2, 0.996431069037798)];
    for (i, j, c) in want {
        assert!((corr[i][j].as_f64().unwrap() - c).abs() < 1e-12);
        assert_eq!(corr[i][j], corr[j][i]);
    }
    let panel_a = fs::read_to_string(dir.path().join("summary_panel_a.csv")).unwrap();
    assert!(panel_a.starts_with("# config: command=stats"));
    assert!(panel_a.contains("statistic,VIX,VXFC,VXFS"));
}

#[test]
fn stats_on_flat_prices_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(bin()
        .arg("stats")
        .arg("--vix")
        .arg(fixture("flat_vix.csv"))
        .arg("--futures")
        .arg(fixture("flat_futures.csv"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("degenerate"), "{stderr}");
}

#[test]
fn stats_on_sample_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(bin()
        .arg("stats")
        .arg("--vix")
        .arg(sample("vix.csv"))
        .arg("--futures")
        .arg(sample("futures.csv"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    for row in json["panel_a"].as_array().unwrap() {
        assert_eq!(row["n_prices"], 300);
        let p = row["adf_constant"]["p_value"].as_f64().unwrap();
        assert!(p < 0.01, "returns should reject a unit root, p = {p}");
    }
}

fn bench(json: &str) -> (i32, String, String, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scenarios.json");
    fs::write(&spec, json).unwrap();
    let (code, out, err) = run(bin()
        .arg("bench")
        .arg(&spec)
        .arg("--omit-runtime")
        .arg("--out")
        .arg(dir.path().join("out")));
    (code, out, err, dir)
}

#[test]
fn bench_empty_list() {
    let (code, stdout, stderr, dir) = bench(r#"{"scenarios": []}"#);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    let report = fs::read_to_string(dir.path().join("out/bench_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn bench_malformed_json() {
    let (code, _, stderr, _dir) = bench(r#"{"scenarios": [ {"name": "x", "kind": "lag" "#);
    assert_eq!(code, 2);
    assert!(stderr.contains("scenarios.json"), "{stderr}");
    let (code, _, _, _dir) = bench(r#"{"scenarios": [{"name": "x", "kind": "lag", "segments": [{"length": 3, "lag": 5}]}]}"#);
    assert_eq!(code, 2);
}

#[test]
fn bench_oracle_and_constant_lag() {
    let (code, stdout, stderr, dir) = bench(
        r#"{"scenarios": [
            {"name": "oracle6", "kind": "oracle", "n": 6, "instances": 5, "seed": 3},
            {"name": "lag5", "kind": "lag", "segments": [{"length": 300, "lag": 5}], "seed": 1}
        ]}"#,
    );
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("oracle6: oracle agreement PASS"), "{stdout}");
    let report = fs::read_to_string(dir.path().join("out/bench_report.csv")).unwrap();
    let row = report.lines().find(|l| l.starts_with("lag5,")).unwrap();
    // The recovery target itself is checked by the acceptance suite.
    let rmse: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!(rmse.is_finite() && rmse >= 0.0);
    assert_eq!(row.split(',').nth(4), Some("0"), "no truth change, zero latency");
}
