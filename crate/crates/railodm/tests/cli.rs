use std::path::Path;
use std::process::{Command, Output};

use railodm::run_file::LoadedManifest;

fn railodm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_railodm"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL_ROUTE: &str = r#"{"length_m":3000,"line_speed_mps":15,"features":[
    {"position_m":600,"kind":"signal","limit_mps":15},
    {"position_m":1200,"kind":"speed_limit","limit_mps":8},
    {"position_m":2000,"kind":"station","dwell_s":5},
    {"position_m":2500,"kind":"signal","limit_mps":15}]}"#;

fn small_dataset(dir: &Path, runs: &str) -> std::path::PathBuf {
    let route = dir.join("small.json");
    std::fs::write(&route, SMALL_ROUTE).unwrap();
    let out = dir.join("data");
    let o = railodm(&[
        "generate",
        "--route",
        p(&route),
        "--runs",
        runs,
        "--seed",
        "3",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.json")
}

#[test]
fn generate_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(dir.path(), "1");
    let m = LoadedManifest::load(&manifest).unwrap();
    assert_eq!(m.manifest.runs.len(), 1);
    assert_eq!(m.manifest.runs[0].seed, 3);
}

#[test]
fn generate_is_repeatable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = std::fs::read(small_dataset(a.path(), "2")).unwrap();
    let mb = std::fs::read(small_dataset(b.path(), "2")).unwrap();
    assert_eq!(
        railodm::hashing::sha256_hex(&ma),
        railodm::hashing::sha256_hex(&mb)
    );
}

#[test]
fn bad_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let route = dir.path().join("bad.json");
    std::fs::write(&route, r#"{"length_m":100,"line_speed_mps":10,"features":[{"position_m":500,"kind":"signal","limit_mps":10}]}"#).unwrap();
    let o = railodm(&[
        "generate",
        "--route",
        p(&route),
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid route"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = railodm(&["generate", "--runs", "1", "--out", p(&blocker.join("sub"))]);
    assert!(!o.status.success());
}

#[test]
fn fit_and_eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(dir.path(), "4");
    let base = dir.path().join("base.json");
    let o = railodm(&[
        "fit",
        "--manifest",
        p(&manifest),
        "--train-count",
        "3",
        "--features",
        "base",
        "--out",
        p(&base),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("prior"));

    let report = dir.path().join("r.json");
    let o = railodm(&[
        "eval",
        "--model",
        p(&base),
        "--manifest",
        p(&manifest),
        "--variants",
        "NB",
        "--out",
        p(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = railodm::report_file::load_report(&report).unwrap();
    assert_eq!(doc.variants.len(), 1);

    // OwO+PI needs a model with previous-input features.
    let o = railodm(&[
        "eval",
        "--model",
        p(&base),
        "--manifest",
        p(&manifest),
        "--out",
        p(&report),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("previous-input"));

    let weights = dir.path().join("w.json");
    let mut doc = railodm::weights_file::weights_to_value(&Default::default());
    doc["Cruise"]["SL"] = (-1).into();
    std::fs::write(&weights, doc.to_string()).unwrap();
    let o = railodm(&[
        "eval",
        "--model",
        p(&base),
        "--manifest",
        p(&manifest),
        "--weights",
        p(&weights),
        "--variants",
        "NB",
        "--out",
        p(&report),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Cruise.SL"));

    let o = railodm(&[
        "fit",
        "--manifest",
        p(&manifest),
        "--train-count",
        "4",
        "--out",
        p(&base),
    ]);
    assert!(!o.status.success());
}

#[test]
fn fixture_pipeline_passes_claims() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = railodm(&["generate", "--runs", "25", "--out", p(&data)]);
    assert!(o.status.success());
    let rows: usize = stdout(&o)
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(rows >= 1_000_000, "{rows}");

    let model = dir.path().join("model.json");
    let manifest = data.join("manifest.json");
    assert!(railodm(&[
        "fit",
        "--manifest",
        p(&manifest),
        "--features",
        "with-pi",
        "--out",
        p(&model)
    ])
    .status
    .success());
    let report = dir.path().join("report.json");
    let o = railodm(&[
        "eval",
        "--model",
        p(&model),
        "--manifest",
        p(&manifest),
        "--out",
        p(&report),
    ]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.matches("PASS").count(), 6, "{text}");
    for s in [
        "Cruise",
        "AWS",
        "Engine_Check",
        "Brake_Change",
        "Speed_Change",
        "Overall",
    ] {
        assert!(text.lines().any(|l| l.starts_with(s)), "{s} row missing");
    }
}
