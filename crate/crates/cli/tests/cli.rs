use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boundkey"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn keyrate_on_four_by_five_fixture() {
    let dir = fixtures();
    let out = run(&[
        "keyrate",
        path(&dir.join("4x5.json")),
        "--channel",
        path(&dir.join("4x5_q.json")),
    ]);
    assert!(out.status.success());
    let rate = json(&out)["noisy_bound"].as_f64().unwrap();
    assert!(rate >= 0.0347590 - 1e-4, "{rate}");
}

#[test]
fn validate_product_distribution_fails_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("product.json");
    let entries: Vec<Value> = (0..2)
        .flat_map(|a| {
            (0..2).flat_map(move |b| (0..2).map(move |e| serde_json::json!([a, b, e, 0.125])))
        })
        .collect();
    fs::write(
        &file,
        serde_json::json!({"dA": 2, "dB": 2, "dE": 2, "entries": entries}).to_string(),
    )
    .unwrap();
    let out = run(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["unambiguous"], Value::Bool(false));
    assert!(!report["unambiguity"]["violations"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn validate_fixture_succeeds() {
    let out = run(&["validate", path(&fixtures().join("3x3.json"))]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["unambiguous"], Value::Bool(true));
    assert_eq!(report["pt"]["is_pt_invariant"], Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["keyrate"]).status.code(), Some(2));
    assert_eq!(
        run(&["keyrate", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
    let out = run(&[
        "render",
        "--diagram",
        path(&fixtures().join("3x3_diagram.json")),
        "--format",
        "png",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("File formats"));
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}

#[test]
fn malformed_json_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("bad.json");
    fs::write(&file, "{ not json").unwrap();
    assert_eq!(run(&["lift", path(&file)]).status.code(), Some(2));
}

#[test]
fn lift_is_a_square_density_matrix() {
    let out = run(&["lift", path(&fixtures().join("3x3.json"))]);
    assert!(out.status.success());
    let rho = json(&out);
    assert_eq!(rho["dA"], 3);
    assert_eq!(rho["dB"], 3);
    let m: Vec<f64> = rho["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(m.len(), 81);
    let trace: f64 = (0..9).map(|i| m[i * 9 + i]).sum();
    assert!((trace - 1.0).abs() < 1e-12);
    for i in 0..9 {
        for j in 0..9 {
            assert_eq!(m[i * 9 + j], m[j * 9 + i]);
        }
    }
}

#[test]
fn enumerate_two_by_two_finds_the_cross() {
    let out = run(&["enumerate", "--da", "2", "--db", "2"]);
    assert!(out.status.success());
    let ds = json(&out);
    assert_eq!(ds.as_array().unwrap().len(), 1);
    assert_eq!(ds[0]["cliques"].as_array().unwrap().len(), 2);
}

#[test]
fn infer_recovers_the_fixture_diagram() {
    let dir = fixtures();
    let out = run(&[
        "infer",
        "--pab",
        path(&dir.join("3x3_pab.json")),
        "--de",
        "4",
    ]);
    assert!(out.status.success());
    let expected: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("3x3_diagram.json")).unwrap()).unwrap();
    assert!(json(&out).as_array().unwrap().contains(&expected));
}

#[test]
fn infer_without_solutions_exits_one() {
    let out = run(&[
        "infer",
        "--pab",
        path(&fixtures().join("3x3_pab.json")),
        "--de",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn render_svg_to_file() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("d.svg");
    let d = fixtures().join("3x3_diagram.json");
    let out = run(&[
        "render",
        "--diagram",
        path(&d),
        "--format",
        "svg",
        "--out",
        path(&file),
    ]);
    assert!(out.status.success());
    let svg = fs::read_to_string(file).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 9);
}

#[test]
fn reproduce_is_deterministic_and_matches_repo_fixtures() {
    let t1 = tempfile::tempdir().unwrap();
    let t2 = tempfile::tempdir().unwrap();
    for t in [&t1, &t2] {
        assert!(run(&["reproduce", "--out", path(t.path())])
            .status
            .success());
    }
    for name in ["report.json", "table.md"] {
        assert_eq!(
            fs::read(t1.path().join(name)).unwrap(),
            fs::read(t2.path().join(name)).unwrap()
        );
    }
    for entry in fs::read_dir(fixtures()).unwrap() {
        let entry = entry.unwrap();
        let generated = fs::read(t1.path().join("fixtures").join(entry.file_name())).unwrap();
        assert_eq!(
            generated,
            fs::read(entry.path()).unwrap(),
            "{:?}",
            entry.file_name()
        );
    }
    let table = fs::read_to_string(t1.path().join("table.md")).unwrap();
    assert_eq!(table.lines().count(), 7);
}

#[test]
fn optimize_writes_result() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("opt.json");
    let d = fixtures().join("3x3_diagram.json");
    let out = run(&[
        "optimize",
        "--diagram",
        path(&d),
        "--starts",
        "4",
        "--seed",
        "1",
        "--penalty-schedule",
        "1e2,1e4",
        "--max-evals",
        "4000",
        "--out",
        path(&file),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    assert!(v["result"]["best_rate"].as_f64().unwrap() >= 0.0);
}

fn protocol_rate(message: Value) -> f64 {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixtures();
    let proto = tmp.path().join("p.json");
    let q: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("3x3_q.json")).unwrap()).unwrap();
    let protocol = serde_json::json!({
        "steps": [{"speaker": "A", "q": message}],
        "final_channel": q,
        "direction": "A->B"
    });
    fs::write(&proto, protocol.to_string()).unwrap();
    let out = run(&[
        "protocol",
        path(&dir.join("3x3.json")),
        "--protocol",
        path(&proto),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    json(&out)["noisy_bound"].as_f64().unwrap()
}

#[test]
fn protocol_constant_message_keeps_the_rate() {
    let rate = protocol_rate(serde_json::json!([[1, 1, 1]]));
    assert!((rate - 0.005786087895).abs() < 1e-9, "{rate}");
}

#[test]
fn protocol_announcing_a_destroys_the_rate() {
    let rate = protocol_rate(serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]]));
    assert!(rate.abs() < 1e-12, "{rate}");
}
