use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use volflux_cli::report::csv_headers;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volflux"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().arg("run").args(args).arg("--out").arg(out).output().unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn list_is_stable_and_complete() {
    let a = bin().arg("list").output().unwrap();
    let b = bin().arg("list").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for needle in ["genus2-L", "torus", "standard", "theorem2", "lemma3", "invariants"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn shipped_default_scenario_passes_at_reduced_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("default.json");
    let o = run(&["--scenario", path.to_str().unwrap(), "--samples", "20000", "--grid", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path());
    assert_eq!(r["schemaVersion"], 1);
    assert_eq!(r["aggregatePass"], true);
    for (file, header) in csv_headers() {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
        assert!(text.lines().count() > 1, "{file} is empty");
    }
}

#[test]
fn torus_loop_demo_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("torus-loop.json");
    let o = run(&["--scenario", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["surface"], "torus");
    let demo = &r["fluxLoopDemo"][0];
    assert_eq!(demo["isLoop"], true);
    let periods: Vec<f64> = demo["flux"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(periods.iter().any(|p| (p.abs() - 1.0).abs() < 1e-12));
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn boundary_touching_profile_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{
  "words": [{ "id": "w", "letters": [{ "profile": {
    "cylinder": "h1", "breakpoints": [0.0, 0.5, 1.0], "coeffs": [[0, 2, 0, 0], [1, -2, 0, 0]] } }] }],
  "suites": ["flux-loop-demo"]
}"#,
    )
    .unwrap();
    let o = run(&["--scenario", file.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("words[0].letters[0].profile"), "{err}");
}

#[test]
fn malformed_document_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, "{\n  \"suites\": [\"lemma3\"],\n  \"budget\": { \"samples\": -4 }\n}").unwrap();
    let o = run(&["--scenario", file.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_suite_flag_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--suite", "lemma4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--suite", "lemma3", "--samples", "5000", "--grid", "32", "--tolerance-scale", "1e-9"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(dir.path())["aggregatePass"], false);
}

#[test]
fn reports_are_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let common = ["--suite", "lemma3,flux-oracle,injectivity", "--samples", "8192", "--grid", "32", "--seed", "11"];
    let oa = bin().arg("run").args(common).args(["--workers", "1", "--out"]).arg(a.path()).output().unwrap();
    let ob = bin().arg("run").args(common).args(["--workers", "2", "--out"]).arg(b.path()).output().unwrap();
    assert!(oa.status.success() && ob.status.success());
    for f in ["report.json", "checks.csv", "gamma.csv", "flux.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}
