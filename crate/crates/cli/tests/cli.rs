use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use splitree::bounds::BoundsReport;
use splitree::dichotomy::DichotomyVerdict;
use splitree::FreenessWitness;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn data(name: &str) -> String {
    dir("data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(dir("golden").join(name)).unwrap()
}

#[test]
fn classify_golden() {
    let o = run(&["classify", "--group", &data("z2_z3.json"), "--element", "a b", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("classify_z2_z3_ab.json"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "hyperbolic");
    assert_eq!(v["tau"], 2);
}

#[test]
fn bounds_golden() {
    let o = run(&["bounds", "--entropy", "1", "--diam", "1", "--k", "4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("bounds_1_1_4.json"));
    let r: BoundsReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(((r.s0_general - 2.0436356112148888e-11) / r.s0_general).abs() < 1e-9);
}

#[test]
fn dichotomy_golden() {
    let o = run(&["dichotomy", &data("torus_bundle.json"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("dichotomy_torus_bundle.json"));
    let v: DichotomyVerdict = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.verdict.to_string(), "geometric (Sol)");
    let o = run(&["dichotomy", "--manifold", &data("torus_bundle.json")]);
    assert_eq!(stdout(&o), golden("dichotomy_torus_bundle.txt"));
}

#[test]
fn witness_round_trip() {
    let o = run(&["free-witness", "--group", "sample:z2_z3", "--element", "a", "--element", "b", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let w: FreenessWitness = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(w.certified);
    assert_eq!(w.power_used, 1);
}

#[test]
fn exit_codes() {
    // Input errors.
    assert_eq!(run(&["classify", "--group", "sample:z2_z3", "--element", "q"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--group", "/nonexistent.json", "--element", "a"]).status.code(), Some(1));
    assert_eq!(run(&["bounds", "--entropy", "0", "--diam", "1"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["entropy", "--weights", "1"]).status.code(), Some(1));
    // Falsified or not applicable.
    assert_eq!(run(&["acyl-check", "--group", "sample:klein", "--k", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["free-witness", "--group", "sample:z_z", "--element", "x", "--element", "x^2"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["axis", "--group", "sample:z2_z3", "--element", "a"]).status.code(), Some(2));
    // Success.
    assert_eq!(run(&["acyl-check", "--group", "sample:z2_z3"]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn text_outputs() {
    let o = run(&["tau", "--group", "sample:z_z", "--element", "x y"]);
    assert_eq!(stdout(&o).trim(), "2");
    let o = run(&["entropy", "--weights", "1,1"]);
    assert!(stdout(&o).starts_with("root 1.098612288668"));
    let o = run(&["fix", "--group", "sample:z2_z3", "--element", "a", "--radius", "3"]);
    assert!(stdout(&o).starts_with("1 fixed vertices within radius 3"));
}

#[test]
fn json_reports_reparse() {
    for args in [
        vec!["fix", "--group", "sample:klein", "--element", "a^2", "--radius", "2", "--json"],
        vec!["axis", "--group", "sample:z2_z3", "--element", "a b", "--json"],
        vec!["entropy", "--weights", "1,2", "--semigroup", "--json"],
        vec!["acyl-check", "--group", "sample:klein", "--json"],
    ] {
        let o = run(&args);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(v.is_object());
    }
}
