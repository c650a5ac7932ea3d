use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcompat"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {r}"))
}

fn residuals(r: &Value) -> Vec<(String, Value)> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["name"].as_str().unwrap().to_string(),
                c["residual"].clone(),
            )
        })
        .collect()
}

#[test]
fn compatible_scenes_exit_zero() {
    for scene in ["scenes/flat.json", "scenes/s2-kahler.json"] {
        let o = run(&["compat", &fixture(scene)]);
        assert_eq!(
            code(&o),
            0,
            "{scene}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let r = report(&o);
        assert_eq!(r["passed"], true);
        assert!(check(&r, "nabla_pi")["residual"].as_f64().unwrap() < 1e-7);
        assert!(check(&r, "d_pi")["residual"].as_f64().unwrap() < 1e-7);
    }
}

#[test]
fn incompatible_scene_exits_one() {
    let o = run(&[
        "compat",
        &fixture("scenes/nonparallel-flat.json"),
        "--which",
        "nabla",
    ]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_eq!(r["passed"], false);
    assert_eq!(r["checks"].as_array().unwrap().len(), 1);
    assert_eq!(check(&r, "nabla_pi")["passed"], false);
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["compat", "/nonexistent/scene.json"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dimension": 2, "coordinates": ["x"]}"#).unwrap();
    assert_eq!(code(&run(&["compat", bad.to_str().unwrap()])), 2);

    let o = run(&[
        "transport",
        &fixture("scenes/s2-kahler.json"),
        "--curve",
        &fixture("curves/s2-loop.json"),
        "--beta0",
        "1,0,0",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_fields() {
    let o = run(&[
        "compat",
        &fixture("scenes/s2-kahler.json"),
        "--samples",
        "8",
        "--seed",
        "7",
    ]);
    let r = report(&o);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["command"], "compat");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["samples"], 8);
    assert_eq!(r["strategy"], "ad");
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
    assert!(r["tolerances"]["compat"].is_number());
    assert_eq!(r["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn report_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = run(&[
        "identities",
        &fixture("scenes/s2-kahler.json"),
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for name in [
        "metric",
        "torsion",
        "schouten",
        "tilde_difference",
        "s_tensor",
        "poisson_jacobi",
    ] {
        assert_eq!(check(&r, name)["passed"], true);
    }
    assert_eq!(check(&r, "jtilde_route")["passed"], true);
}

#[test]
fn tolerance_and_strategy_flags() {
    let scene = fixture("scenes/s2-kahler.json");
    let o = run(&["compat", &scene, "--strategy", "fd", "--tol", "1e-3"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["strategy"], "fd");
    assert_eq!(check(&r, "d_pi")["tolerance"], 1e-3);
    let o = run(&[
        "compat",
        &fixture("scenes/nonparallel-flat.json"),
        "--tol",
        "10",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn curvature_flags_kahler_leaves() {
    let o = run(&[
        "curvature",
        &fixture("scenes/s2-kahler.json"),
        "--samples",
        "8",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert!(r["flags"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "KAHLER_LEAVES"));
    assert_eq!(check(&r, "pi_r_cocycle")["passed"], true);
    assert!(r["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "einstein_fit"));
}

#[test]
fn curvature_demotes_leaf_checks_when_incompatible() {
    let o = run(&[
        "curvature",
        &fixture("scenes/nonparallel-flat.json"),
        "--samples",
        "8",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert!(r["flags"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "NOT_COMPATIBLE"));
    let diags = r["diagnostics"].as_array().unwrap();
    assert!(diags.iter().any(|c| c["name"] == "leaf_omega_parallel"));
}

#[test]
fn transport_on_the_sphere() {
    let o = run(&[
        "transport",
        &fixture("scenes/s2-kahler.json"),
        "--curve",
        &fixture("curves/s2-loop.json"),
        "--beta0",
        "0.3,-0.8",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert!(check(&r, "isometry")["residual"].as_f64().unwrap() < 1e-6);
    assert!(check(&r, "j_commutes")["residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["data"]["steps"], 256);
}

#[test]
fn residuals_are_reproducible() {
    let cases: [&[&str]; 4] = [
        &["compat", "scenes/random-plane.json"],
        &["identities", "scenes/s2-times-line.json"],
        &["curvature", "scenes/s2-kahler.json"],
        &["lie", "search", "algebras/oscillator.json"],
    ];
    for case in cases {
        let mut args: Vec<String> = case.iter().map(|s| s.to_string()).collect();
        let last = args.len() - 1;
        args[last] = fixture(&args[last]);
        if case[0] != "lie" {
            args.extend(["--samples".into(), "6".into()]);
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = report(&run(&refs));
        let b = report(&run(&refs));
        assert_eq!(residuals(&a), residuals(&b), "{case:?}");
        assert_eq!(a["input_digest"], b["input_digest"]);
        assert_eq!(a["data"], b["data"]);
    }
}

#[test]
fn every_algebra_fixture_is_quadratic() {
    let dir = PathBuf::from(fixture("algebras"));
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = run(&["lie", "check", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", path.display());
        let r = report(&o);
        assert_eq!(r["exact"]["jacobi"], "0");
        assert_eq!(r["exact"]["ad_invariance"], "0");
        seen += 1;
    }
    assert_eq!(seen, 10);
}

#[test]
fn lie_geometry_on_sl2() {
    let o = run(&[
        "lie",
        "geometry",
        &fixture("algebras/sl2.json"),
        "--vector",
        "1,0,0",
    ]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_eq!(r["exact"]["cond14"], "4");
    assert_eq!(r["exact"]["cond15"], "4");
    assert_eq!(r["exact"]["skewness"], "0");
    assert_eq!(r["data"]["nabla_compatible"], false);

    let o = run(&[
        "lie",
        "geometry",
        &fixture("algebras/medina-r5.json"),
        "--vector",
        "1,-1/2,0,2,1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["data"]["d_compatible"], true);

    let o = run(&[
        "lie",
        "geometry",
        &fixture("algebras/sl2.json"),
        "--vector",
        "1,0",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn lie_search_reports_tables() {
    let o = run(&[
        "lie",
        "search",
        &fixture("algebras/sl2.json"),
        &fixture("algebras/medina-r5.json"),
        "--grid",
        "-1..1",
    ]);
    let r = report(&o);
    let tables = r["data"]["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 2);
    assert_eq!(tables[0]["vectors"], 27);
    assert_eq!(tables[1]["vectors"], 243);
    assert_eq!(tables[1]["counts"]["neither"], Value::Null);
    let witness = check(&r, "independence_witness");
    assert_eq!(code(&o), if witness["passed"] == true { 0 } else { 1 });
    assert_eq!(
        code(&run(&[
            "lie",
            "search",
            &fixture("algebras/sl2.json"),
            "--grid",
            "3..1"
        ])),
        2
    );
}
