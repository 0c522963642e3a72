use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn elastica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = elastica(&full);
    let code = out.status.code().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let k = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_in(a.path(), &["solve", "--height", "0.4"]).0, 0);
    assert_eq!(run_in(b.path(), &["solve", "--height", "0.4"]).0, 0);
    for f in ["profile.csv", "report.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let text = fs::read_to_string(a.path().join("profile.csv")).unwrap();
    assert!(text.starts_with("x,u,du,d2u,d3u,psi\n"));
    assert_eq!(text.lines().count(), 402);
}

#[test]
fn solve_reports_the_initial_slope() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["solve", "--height", "0.16"]);
    assert_eq!(code, 0);
    let alpha = r["outputs"]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 0.02, "{alpha}");
    assert!(r["outputs"]["d3u_left_limit"].as_f64().unwrap() < 0.0);
}

#[test]
fn exit_codes() {
    let out = elastica(&["solve", "--height", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("0.834626"), "{msg}");
    assert_eq!(elastica(&["solve", "--height", "1.2"]).status.code(), Some(2));
    assert_eq!(elastica(&["solve", "--height", "0.3", "--grid", "400"]).status.code(), Some(3));
    assert_eq!(elastica(&["solve", "--height", "-0.3"]).status.code(), Some(3));
    assert_eq!(elastica(&["solve", "--bogus"]).status.code(), Some(3));
    assert_eq!(elastica(&["sweep", "--alpha-min", "2", "--alpha-max", "1"]).status.code(), Some(3));
    assert_eq!(elastica(&["curves", "--alpha", "0"]).status.code(), Some(3));
    assert_eq!(elastica(&["--help"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_elastica"))
        .env("ELASTICA_QUAD_NODES", "many")
        .arg("constants")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_schema() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["constants"]);
    assert_eq!(code, 0);
    let obj = r.as_object().unwrap();
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    assert_eq!(keys, ["checks", "command", "inputs", "outputs", "version"]);
    assert_eq!(r["command"], "constants");
    for c in r["checks"].as_array().unwrap() {
        let keys: Vec<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["measured", "name", "pass", "tolerance"]);
        assert!(c["pass"].is_boolean() && c["measured"].is_number() && c["tolerance"].is_number());
    }
    for key in ["c0", "c_star", "L_U", "K"] {
        assert!(r["outputs"][key].is_number(), "{key}");
    }
    let written: Value = serde_json::from_str(&fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(written, r);
    assert_eq!(check(&r, "c0_printed")["pass"], true);
    assert_eq!(check(&r, "L_U_node_doubling")["pass"], true);
}

#[test]
fn sweep_columns() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["sweep", "--alpha-min", "1e-2", "--alpha-max", "1e4", "--count", "40"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,height,beta_star,L_alpha,d3u_limit\n"));
    let h = column(&csv, "height");
    assert!(h.windows(2).all(|w| w[1] > w[0]));
    assert!(column(&csv, "beta_star").iter().all(|b| *b < 0.0));
    assert!(r["outputs"]["c_star_minus_last_height"].as_f64().unwrap().abs() < 1e-2);
}

#[test]
fn flow_scenario() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["flow", "--height", "0.3", "--n", "201"]);
    assert_eq!(code, 0, "{r}");
    assert!(r["outputs"]["final_h2_distance"].as_f64().unwrap() <= 1e-2);
    let csv = fs::read_to_string(d.path().join("trajectory.csv")).unwrap();
    let e = column(&csv, "energy");
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-8));
    let m_star = r["outputs"]["m_star"].as_f64().unwrap();
    assert!(column(&csv, "slope_max").iter().all(|s| *s <= 1.01 * m_star));
    assert!(d.path().join("final.csv").exists());
}

#[test]
fn curves_svg_overlays_two_polylines() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["curves", "--alpha", "1000"]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["convergence_gap"].as_f64().unwrap() <= 0.1);
    let svg = fs::read_to_string(d.path().join("curves.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);
    for f in ["gamma_alpha.csv", "gamma_u.csv"] {
        let text = fs::read_to_string(d.path().join(f)).unwrap();
        assert!(text.starts_with("s,x,y,theta,kappa\n"));
    }
}

#[test]
fn json_format_writes_row_objects() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run_in(d.path(), &["--format", "json", "sweep", "--count", "5"]).0, 0);
    let rows: Value = serde_json::from_str(&fs::read_to_string(d.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert!(rows[0]["height"].is_number());
    assert!(!d.path().join("sweep.csv").exists());
}

#[test]
fn verify_passes_and_detects_a_perturbed_constant() {
    let d = tempfile::tempdir().unwrap();
    let (code, r) = run_in(d.path(), &["verify"]);
    assert_eq!(code, 0, "{r}");
    assert!(r["checks"].as_array().unwrap().len() >= 15);
    let (code, r) = run_in(d.path(), &["verify", "--perturb-c0", "1e-9"]);
    assert_eq!(code, 4);
    assert_eq!(check(&r, "c0_quadrature_vs_gamma")["pass"], false);
}
