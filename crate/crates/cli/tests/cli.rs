//! End-to-end runs of the `lunar3b` binary.

use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lunar3b"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

fn check_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn json_of(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

const REF: [&str; 4] = ["--alpha-hat", "0.5", "--beta-hat", "0.2"];
const ORBITS: [&str; 6] = [
    "--masses",
    "1,0.5,0.2",
    "--elements1",
    "1,0.3,0.4,0.1,0.5,0",
    "--elements2",
    "15,0.2,1.2,0.3,0.7,2",
];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn classify_reports_region() {
    let v = json_of(&with(&["classify"], &with(&REF, &["--format", "json"])));
    assert_eq!(v, json!({"region": "Region1"}));
    check_schema("classify", &v);
    assert_eq!(
        ok(&with(&["classify", "--format", "csv"], &REF)),
        "region\nRegion1\n"
    );
}

#[test]
fn singularities_include_a() {
    let v = json_of(&with(&["singularities"], &REF));
    check_schema("singularities", &v);
    let a = v
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["kind"] == "A")
        .expect("A present");
    assert!((a["location"]["delta"].as_f64().unwrap() - 0.60828).abs() < 1e-5);
    assert_eq!(a["stability"], "hyperbolic");
}

#[test]
fn portrait_formats() {
    let v = json_of(&with(
        &[
            "portrait", "--format", "json", "--grid", "96", "--levels", "4",
        ],
        &REF,
    ));
    check_schema("portrait", &v);
    let curves = v["curves"].as_array().unwrap();
    assert!(curves.iter().any(|c| c["kind"] == "separatrix"));
    assert!(curves.iter().filter(|c| c["kind"] == "level").count() >= 4);

    let svg = ok(&with(&["portrait", "--grid", "96"], &REF));
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polyline") && svg.contains("<circle"));

    let csv = ok(&with(
        &[
            "portrait", "--format", "csv", "--grid", "96", "--levels", "auto",
        ],
        &REF,
    ));
    assert!(csv.starts_with("curve,kind,level,delta,omega\n"));
}

#[test]
fn freqmap_csv_and_json() {
    let csv = ok(&with(
        &["freqmap", "--branch", "libration", "--levels", "4"],
        &REF,
    ));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,I1,nu1,nu2,torsion");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let cols: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[1] > 0.0 && cols[2] > 0.0);
    }
    let v = json_of(&with(
        &[
            "freqmap", "--format", "json", "--branch", "circ-min", "--levels", "3",
        ],
        &REF,
    ));
    check_schema("freqmap", &v);
}

#[test]
fn elliptic_torus_record() {
    let v = json_of(&with(&["elliptic-torus"], &REF));
    check_schema("elliptic-torus", &v);
    assert!(v["nu_normal"].as_f64().unwrap() > 0.0);
}

#[test]
fn average_from_flags_and_config() {
    let v = json_of(&with(
        &["average"],
        &with(&ORBITS, &["--alpha-list", "0.02,0.04,0.08"]),
    ));
    check_schema("average", &v);
    let (avg, quad) = (
        v["average"].as_f64().unwrap(),
        v["quadrupolar"].as_f64().unwrap(),
    );
    assert!(((avg - quad) / avg).abs() < 1e-2);
    assert!(v["fitted_exponent"].is_number());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("avg.json");
    let doc = json!({
        "command": "average",
        "masses": [1.0, 0.5, 0.2],
        "elements1": {"a": 1.0, "e": 0.3, "i": 0.4, "l": 0.1, "g": 0.5, "h": 0.0},
        "elements2": {"a": 15.0, "e": 0.2, "i": 1.2, "l": 0.3, "g": 0.7, "h": 2.0},
        "nodes": 32
    });
    std::fs::write(&cfg, doc.to_string()).unwrap();
    let from_cfg = json_of(&["average", "--config", cfg.to_str().unwrap()]);
    check_schema("average", &from_cfg);
    assert!(from_cfg["fitted_exponent"].is_null());
    assert!(((from_cfg["average"].as_f64().unwrap() - avg) / avg).abs() < 1e-10);

    // a flag overrides the file
    let moved = json_of(&[
        "average",
        "--config",
        cfg.to_str().unwrap(),
        "--elements2",
        "30,0.2,1.2,0.3,0.7,2",
    ]);
    assert!(moved["average"].as_f64().unwrap() < 0.5 * avg);
}

#[test]
fn integrate_outputs() {
    let v = json_of(&with(
        &["integrate", "--format", "json", "--periods", "20"],
        &ORBITS,
    ));
    check_schema("integrate", &v);
    assert!(v["max_relative_energy_error"].as_f64().unwrap() < 1e-9);
    assert!(v["truncated"].is_null());

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let printed = ok(&with(
        &[
            "integrate",
            "--periods",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        &ORBITS,
    ));
    assert!(printed.is_empty());
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("t,Q1x"));
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn demo_kozai_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("kozai.csv");
    let summary = dir.path().join("kozai.json");
    let args = [
        "demo-kozai",
        "--alpha",
        "0.08",
        "--masses",
        "1,0.8,0.3",
        "--periods",
        "400",
        "--seed",
        "3",
        "--out",
        traj.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ];
    ok(&args);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    check_schema("demo-kozai", &v);
    assert_eq!(v["verdict"], "libration");
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert!(csv.lines().count() > 100);

    // identical seed and flags give identical bytes
    let first = std::fs::read(&traj).unwrap();
    ok(&args);
    assert_eq!(first, std::fs::read(&traj).unwrap());
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        with(&["freqmap", "--levels", "6"], &REF),
        with(&["portrait", "--grid", "64"], &REF),
        with(&["average"], &ORBITS),
    ] {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    // domain errors
    assert_eq!(
        code(&["classify", "--alpha-hat", "0.5", "--beta-hat", "-1"]),
        1
    );
    assert_eq!(
        code(&["freqmap", "--alpha-hat", "0.3", "--beta-hat", "0.9"]),
        1
    );
    assert_eq!(
        code(&["classify", "--alpha-hat", "1.5", "--beta-hat", "0.1"]),
        1
    );
    // precision error: the residual sinks below the loosened quadrature tolerance
    assert_eq!(
        code(&with(
            &["average", "--tol", "1e-6", "--alpha-list", "0.001,0.004"],
            &ORBITS
        )),
        2
    );
    // usage errors
    assert_eq!(code(&["classify", "--nonsense"]), 64);
    assert_eq!(code(&["classify", "--alpha-hat", "0.5"]), 64);
    assert_eq!(code(&with(&["classify", "--format", "svg"], &REF)), 64);
    assert_eq!(code(&with(&["freqmap", "--branch", "sideways"], &REF)), 64);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["classify", "--config", bad.to_str().unwrap()]), 64);
    let unknown = dir.path().join("unknown.json");
    std::fs::write(
        &unknown,
        r#"{"alpha_hat": 0.5, "beta_hat": 0.2, "gamma": 1}"#,
    )
    .unwrap();
    assert_eq!(
        code(&["classify", "--config", unknown.to_str().unwrap()]),
        64
    );
    let other = dir.path().join("other.json");
    std::fs::write(
        &other,
        r#"{"command": "portrait", "alpha_hat": 0.5, "beta_hat": 0.2}"#,
    )
    .unwrap();
    assert_eq!(code(&["classify", "--config", other.to_str().unwrap()]), 64);
}

#[test]
fn config_supplies_globals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let cfg = dir.path().join("c.json");
    let doc = json!({"alpha_hat": 0.5, "beta_hat": 0.2, "format": "csv", "out": out});
    std::fs::write(&cfg, doc.to_string()).unwrap();
    assert!(ok(&["classify", "--config", cfg.to_str().unwrap()]).is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "region\nRegion1\n");
    // explicit --format beats the file
    let v = json_of(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        "-",
    ]);
    assert_eq!(v["region"], "Region1");
}
