use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn squarepeg() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_squarepeg"));
    cmd.env_remove("SQUAREPEG_SEED_GRID");
    cmd
}

fn run(args: &[&str]) -> Output {
    squarepeg().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn find(curve: &Path, report: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["find-squares", curve.to_str().unwrap(), "--out", report.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn construct_nsquare_uses_even_anchors() {
    let dir = TempDir::new().unwrap();
    let spec = read_json(&construct(&dir, "n3", &["nsquare", "--n", "3"]));
    let segments = spec["segments"].as_array().unwrap();
    assert_eq!(segments.len(), 4);
    let polar = segments.iter().filter(|s| s["kind"] == "PolarBumpArc").count();
    assert_eq!(polar, 3);
    let anchors = spec["construction"]["anchors"].as_array().unwrap();
    assert_eq!(anchors.len(), 2);
    let quarter = std::f64::consts::FRAC_PI_4;
    assert!((anchors[0].as_f64().unwrap() + quarter / 3.0).abs() < 1e-15);
}

#[test]
fn construct_smooth2_apex() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "s2", &["smooth2", "--c", "1.18264"]);
    let spec = squarepeg::CurveSpec::read(&path).unwrap();
    match &spec.segments[1] {
        squarepeg::Segment::GraphBumpArc(g) => {
            assert!((g.height(0.0) - 0.09172).abs() < 1e-4);
        }
        other => panic!("unexpected segment {other:?}"),
    }
}

#[test]
fn construct_nonsmooth2_has_two_segments() {
    let out = run(&["construct", "nonsmooth2"]);
    assert_eq!(code(&out), 0);
    let spec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(spec["segments"].as_array().unwrap().len(), 2);
}

#[test]
fn construct_rejects_bad_input() {
    for args in [
        &["construct", "nsquare", "--n", "3", "--anchors", "0.1"][..],
        &["construct", "nsquare", "--anchors", "0.2,-0.2"],
        &["construct", "nsquare"],
        &["construct", "smooth2", "--c", "-1"],
        &["construct", "circle", "--n", "2"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    assert_eq!(code(&run(&["construct", "ellipse"])), 2);
    assert_eq!(code(&run(&["construct", "circle", "--bogus"])), 2);
}

#[test]
fn find_squares_on_four_square_curve() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "n4", &["nsquare", "--n", "4"]);
    let report = dir.path().join("r.json");
    let out = find(&curve, &report, &[]);
    assert_eq!(code(&out), 0);
    let r = read_json(&report);
    assert_eq!(r["squares"].as_array().unwrap().len(), 4);
    assert_eq!(r["familySuspected"], false);
    assert_eq!(r["curve"], "4-square");
}

#[test]
fn find_squares_flags_circle_family() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "circle", &["circle"]);
    let report = dir.path().join("r.json");
    let out = find(&curve, &report, &["--threads", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&report)["familySuspected"], true);
}

#[test]
fn oracle_agrees_on_smooth2() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "s2", &["smooth2", "--c", "1.17"]);
    let report = dir.path().join("r.json");
    let out = find(&curve, &report, &["--oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle agrees"));
}

#[test]
fn oracle_disagreement_exit_code() {
    // The two methods sample the circle's continuum of squares differently.
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "circle", &["circle"]);
    let report = dir.path().join("r.json");
    let out = find(&curve, &report, &["--oracle", "--grid", "8"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle disagrees"));
}

#[test]
fn grid_comes_from_flag_then_environment() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "ns", &["nonsmooth2"]);
    let report = dir.path().join("r.json");
    let out = squarepeg()
        .env("SQUAREPEG_SEED_GRID", "12")
        .args(["find-squares", curve.to_str().unwrap(), "--out", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&report)["config"]["gridResolution"], 12);

    let out = squarepeg()
        .env("SQUAREPEG_SEED_GRID", "12")
        .args(["find-squares", curve.to_str().unwrap(), "--grid", "16"])
        .args(["--out", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&report)["config"]["gridResolution"], 16);

    let out = squarepeg()
        .env("SQUAREPEG_SEED_GRID", "many")
        .args(["find-squares", curve.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn find_squares_writes_csv() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "ns", &["nonsmooth2"]);
    let report = dir.path().join("r.csv");
    assert_eq!(code(&find(&curve, &report, &[])), 0);
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn find_squares_input_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["find-squares", missing.to_str().unwrap()])), 2);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"name\": 3}").unwrap();
    assert_eq!(code(&run(&["find-squares", junk.to_str().unwrap()])), 2);
    let open = dir.path().join("open.json");
    std::fs::write(
        &open,
        r#"{"name":"open","segments":[{"kind":"CircleArc","center":{"x":0,"y":0},"radius":1,"startAngle":0,"endAngle":3}]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["find-squares", open.to_str().unwrap()])), 2);
}

#[test]
fn render_is_structured_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let curve = construct(&dir, "ns", &["nonsmooth2"]);
    let report = dir.path().join("r.json");
    assert_eq!(code(&find(&curve, &report, &[])), 0);
    let svg = |name: &str, locus: bool| {
        let path = dir.path().join(name);
        let mut args = vec![
            "render",
            curve.to_str().unwrap(),
            "--squares",
            report.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ];
        if locus {
            args.push("--locus");
        }
        assert_eq!(code(&run(&args)), 0);
        std::fs::read_to_string(path).unwrap()
    };
    let a = svg("a.svg", false);
    assert_eq!(a.matches("<path ").count(), 1);
    assert_eq!(a.matches("<polygon ").count(), 2);
    assert_eq!(a.matches("<circle ").count(), 1);
    assert_eq!(a.matches("<polyline ").count(), 0);
    assert_eq!(a, svg("b.svg", false));
    let with_locus = svg("c.svg", true);
    assert_eq!(with_locus.matches("<polyline ").count(), 1);
}

#[test]
fn render_warns_on_mismatched_report() {
    let dir = TempDir::new().unwrap();
    let ns = construct(&dir, "ns", &["nonsmooth2"]);
    let circle = construct(&dir, "circle", &["circle"]);
    let report = dir.path().join("r.json");
    assert_eq!(code(&find(&ns, &report, &[])), 0);
    let out = run(&["render", circle.to_str().unwrap(), "--squares", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("<polygon "));
}

#[test]
fn critical_c_reports_amplitude() {
    let out = run(&["critical-c"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["cStar"].as_f64().unwrap() - 1.18264).abs() < 1e-3);
    assert_eq!(v["crossingsBelow"], 0);
    assert_eq!(v["crossingsAbove"], 2);
    assert_eq!(code(&run(&["critical-c", "--low", "1.3", "--high", "1.4"])), 2);
}

#[test]
fn convexity_of_constructions() {
    let dir = TempDir::new().unwrap();
    let n2 = construct(&dir, "n2", &["nsquare", "--n", "2"]);
    let out = run(&["convexity", n2.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["convex"], true);
    assert_eq!(v["arcs"].as_array().unwrap().len(), 2);
    let ns = construct(&dir, "ns", &["nonsmooth2"]);
    assert_eq!(code(&run(&["convexity", ns.to_str().unwrap()])), 2);
}

#[test]
fn verify_subset_passes() {
    let out = run(&["verify", "--criteria", "2,4,8"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("PASS").count(), 3);
}

#[test]
fn verify_failure_names_the_row() {
    // No square on these curves is longer than sqrt(2).
    let out = run(&["verify", "--criteria", "1", "--min-side", "1.5"]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL [1]"));
    assert!(text.contains("failed: [1] exactly-n reproduction"));
    assert_eq!(code(&run(&["verify", "--criteria", "9"])), 2);
}

#[test]
fn written_spec_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = construct(&dir, "n5", &["nsquare", "--n", "5"]);
    let params = squarepeg::ConstructionParams::evenly_spaced(5).unwrap();
    let direct = squarepeg::Curve::new(squarepeg::build_n_square(&params).unwrap()).unwrap();
    let loaded = squarepeg::Curve::new(squarepeg::CurveSpec::read(&path).unwrap()).unwrap();
    for i in 0..1000 {
        let t = i as f64 / 1000.0;
        assert!(direct.eval(t).distance(loaded.eval(t)) <= 1e-15);
    }
}
