use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bellows(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellows")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("bellows-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, v: &Value) -> String {
        let p = self.0.join(name);
        fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

/// Boundary of the cross-polytope: facets `[x1, x2, x3]` with `x_i ∈ {a_i, b_i}`,
/// sign `(−1)^{#b}`.
fn octahedron_files(s: &Scratch) -> (String, String) {
    let mut terms = Vec::new();
    for choice in 0..8u32 {
        let simplex: Vec<String> =
            (0..3).map(|i| format!("{}{}", if choice >> i & 1 == 0 { "a" } else { "b" }, i + 1)).collect();
        let coeff = if choice.count_ones() % 2 == 0 { 1 } else { -1 };
        terms.push(json!({ "simplex": simplex, "coeff": coeff }));
    }
    let cycle = s.file("oct.json", &json!({ "cycle": terms }));
    let coords = s.file(
        "oct-coords.json",
        &json!({ "dim": 3, "field": "rational", "coords": {
            "a1": ["1", "0", "0"], "b1": ["-1", "0", "0"],
            "a2": ["0", "1", "0"], "b2": ["0", "-1", "0"],
            "a3": ["0", "0", "1"], "b3": ["0", "0", "-1"],
        }}),
    );
    (cycle, coords)
}

#[test]
fn volume_is_twelve_v_in_three_dimensions() {
    let s = Scratch::new("volume");
    let (cycle, coords) = octahedron_files(&s);
    let out = bellows(&["volume", "--cycle", &cycle, "--coords", &coords]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["V"], "4/3");
    assert_eq!(r["result"]["W"], "16");
    assert_eq!(r["result"]["W_over_V"], "12");
    let out = bellows(&["volume", "--cycle", &cycle, "--coords", &coords, "--origin", "1/2,-3,7"]);
    assert_eq!(report(&out)["result"]["V"], "4/3");
}

#[test]
fn validate_and_fill() {
    let s = Scratch::new("fill");
    let (cycle, coords) = octahedron_files(&s);
    let r = report(&bellows(&["validate", "--cycle", &cycle]));
    assert_eq!(r["result"]["is_cycle"], true);
    assert_eq!(r["result"]["pseudomanifold"]["is_pm"], true);
    assert_eq!(r["result"]["support_homology"][2]["betti"], 1);

    let out = bellows(&["fill", "--cycle", &cycle, "--coords", &coords]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["volume"]["W_filled"], "16");
    assert_eq!(r["result"]["volume"]["W_direct"], "16");

    // the sphere does not bound inside its own support
    let oct: Value = serde_json::from_str(&fs::read_to_string(&cycle).unwrap()).unwrap();
    let simplices: Vec<Value> = oct["cycle"].as_array().unwrap().iter().map(|t| t["simplex"].clone()).collect();
    let complex = s.file("support.json", &json!({ "simplices": simplices }));
    let out = bellows(&["fill", "--cycle", &cycle, "--complex", &complex]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["fillable"], false);
}

#[test]
fn collapse_example_and_determinism() {
    let args = ["collapse", "--n", "3", "--vertices", "8", "--seed", "7"];
    let a = bellows(&args);
    let b = bellows(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["seed"], 7);
    assert_eq!(r["tolerances"]["edge_tol"], 1e-10);
    assert!(r["result"]["report"]["residual_dim"].as_i64().unwrap() <= 1);
    assert_eq!(r["result"]["report"]["union_violations"], json!([]));
}

#[test]
fn collapse_with_profile_and_padic() {
    let s = Scratch::new("profile");
    let profile = s.file("profile.json", &json!({ "orders": { "v2": [0, -1, 0] } }));
    let r = report(&bellows(&["collapse", "--n", "3", "--vertices", "5", "--profile", &profile, "--seed", "3"]));
    assert_eq!(r["result"]["report"]["f_vector"], json!([5, 6, 4, 1]));
    let out = bellows(&["collapse", "--n", "4", "--vertices", "7", "--padic", "5", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["family"], "5-adic");
}

#[test]
fn prop61_small_corpus() {
    let out = bellows(&["prop61", "--n", "3,4", "--vertices", "7", "--trials", "20", "--padic-trials", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["dimensions"]["3"]["laurent"]["trials"], 20);
    assert_eq!(r["result"]["dimensions"]["4"]["laurent"]["union_violations"], 0);
    assert_eq!(r["result"]["dimensions"]["4"]["padic"]["trials"], 5);
}

#[test]
fn bricard_trace_verify_report() {
    let s = Scratch::new("flex");
    let family = s.path("bricard.json");
    let out = bellows(&["flex", "trace", "--example", "bricard", "--family", &family, "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bellows(&["flex", "verify", "--family", &family]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "pass");
    assert_eq!(r["result"]["samples"], 201);

    let obj = s.path("sample.obj");
    let out = bellows(&["flex", "report", "--family", &family, "--sample", "100", "--obj", &obj]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["rigidity"]["0"]["internal_dof"], 1);
    let text = fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 8);
}

#[test]
fn square_flex_fails_verification() {
    let s = Scratch::new("square");
    let family = s.path("square.json");
    let out = bellows(&["flex", "trace", "--example", "square", "--steps", "50", "--step-size", "0.02", "--family", &family]);
    assert_eq!(out.status.code(), Some(0));
    let out = bellows(&["flex", "verify", "--family", &family]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["verdict"], "fail");
}

#[test]
fn rigid_input_is_a_property_failure() {
    let s = Scratch::new("rigid");
    let (cycle, coords) = octahedron_files(&s);
    let out = bellows(&["flex", "trace", "--cycle", &cycle, "--coords", &coords, "--steps", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["rigid"], true);
}

#[test]
fn sabitov_relations() {
    let s = Scratch::new("sabitov");
    let r = report(&bellows(&["sabitov", "bipyramid"]));
    assert_eq!(r["result"]["relation"]["degree"], 4);
    assert_eq!(r["result"]["relation"]["coefficients"][0], "1");

    let tri = s.file(
        "tri.json",
        &json!({ "dim": 3, "field": "rational", "coords": {
            "p": ["0", "0", "2"], "q": ["1/3", "0", "-1"],
            "a": ["1", "0", "0"], "b": ["0", "1", "0"], "c": ["-1", "-1", "0"],
        }}),
    );
    let out = bellows(&["sabitov", "bipyramid", "--coords", &tri]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["residual"], "0");

    let sq = s.file(
        "square.json",
        &json!({ "dim": 3, "field": "rational", "coords": {
            "p": ["1", "0", "3"], "q": ["0", "1", "-2"],
            "a": ["2", "0", "0"], "b": ["0", "3", "1"], "c": ["-2", "1", "0"], "d": ["1", "-2", "0"],
        }}),
    );
    let out = bellows(&["sabitov", "square", "--coords", &sq]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["residual"], "0");
    assert_eq!(r["result"]["root_distance"], 0.0);

    // apex over the centre of the square: the elimination degenerates
    let symmetric = s.file(
        "symmetric.json",
        &json!({ "dim": 3, "field": "rational", "coords": {
            "p": ["0", "0", "1"], "q": ["1/2", "0", "-2"],
            "a": ["1", "0", "0"], "b": ["0", "1", "0"], "c": ["-1", "0", "0"], "d": ["0", "-1", "0"],
        }}),
    );
    let out = bellows(&["sabitov", "square", "--coords", &symmetric]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("share a factor"));

    assert_eq!(bellows(&["sabitov", "square"]).status.code(), Some(1));
}

#[test]
fn faceposet_examples_and_files() {
    let r = report(&bellows(&["faceposet", "--example", "cube"]));
    assert_eq!(r["result"]["volume"]["W"], "12");
    assert_eq!(r["result"]["volume"]["invariance_residual"], "0");
    assert_eq!(r["result"]["f_vector"], json!([8, 12, 6, 1]));
    assert_eq!(r["result"]["triangular_2_faces"], false);

    // a tetrahedron given as a file without signs
    let s = Scratch::new("poset");
    let faces = json!({ "faces": [
        { "id": "ab", "dim": 1, "vertices": ["a", "b"] },
        { "id": "ac", "dim": 1, "vertices": ["a", "c"] },
        { "id": "ad", "dim": 1, "vertices": ["a", "d"] },
        { "id": "bc", "dim": 1, "vertices": ["b", "c"] },
        { "id": "bd", "dim": 1, "vertices": ["b", "d"] },
        { "id": "cd", "dim": 1, "vertices": ["c", "d"] },
        { "id": "abc", "dim": 2, "vertices": ["a", "b", "c"], "covers": ["ab", "ac", "bc"] },
        { "id": "abd", "dim": 2, "vertices": ["a", "b", "d"], "covers": ["ab", "ad", "bd"] },
        { "id": "acd", "dim": 2, "vertices": ["a", "c", "d"], "covers": ["ac", "ad", "cd"] },
        { "id": "bcd", "dim": 2, "vertices": ["b", "c", "d"], "covers": ["bc", "bd", "cd"] },
        { "id": "T", "dim": 3, "vertices": ["a", "b", "c", "d"], "covers": ["abc", "abd", "acd", "bcd"] },
    ]});
    let poset = s.file("tet.json", &faces);
    let coords = s.file(
        "tet-coords.json",
        &json!({ "dim": 3, "field": "float64", "coords": {
            "a": ["0", "0", "0"], "b": ["1", "0", "0"], "c": ["0", "1", "0"], "d": ["0", "0", "1"],
        }}),
    );
    let out = bellows(&["faceposet", "--poset", &poset, "--coords", &coords]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["incidence"]["violations"], json!([]));
    assert_eq!(r["result"]["volume"]["W"].as_f64().unwrap().abs(), 2.0);

    let mut bad = faces.clone();
    bad["signs"] = json!({ "ab|a": 1, "ab|b": 1 });
    let poset = s.file("bad.json", &bad);
    let out = bellows(&["faceposet", "--poset", &poset]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn heron_and_odd_integrality() {
    let r = report(&bellows(&["cm", "--symbolic", "2"]));
    assert_eq!(r["result"]["terms"], 6);
    let r = report(&bellows(&["cm", "--symbolic", "3"]));
    assert_eq!(r["result"]["half_is_integral"], true);

    let s = Scratch::new("cm");
    let coords = s.file(
        "tri.json",
        &json!({ "dim": 2, "field": "rational", "coords": { "u": ["0", "0"], "v": ["3", "0"], "w": ["0", "4"] } }),
    );
    let r = report(&bellows(&["cm", "--coords", &coords, "--identity"]));
    // −16 A² with A = 6
    assert_eq!(r["result"]["cm"], "-576");
    assert_eq!(r["result"]["identity_residual"], "0");
}

#[test]
fn complex_quadrangle_estimate() {
    let s = Scratch::new("estimate");
    let cycle = s.file(
        "quad.json",
        &json!({ "cycle": [
            { "simplex": ["a", "b"], "coeff": 1 }, { "simplex": ["b", "c"], "coeff": 1 },
            { "simplex": ["c", "d"], "coeff": 1 }, { "simplex": ["d", "a"], "coeff": 1 },
        ]}),
    );
    let coords = s.file(
        "quad-coords.json",
        &json!({ "dim": 2, "field": "complex", "coords": {
            "a": [["0", "0"], ["0", "0"]], "b": [["1", "0"], ["0", "-1"]],
            "c": [["2", "0"], ["0", "0"]], "d": [["1", "0"], ["0", "1"]],
        }}),
    );
    let out = bellows(&["estimate", "--cycle", &cycle, "--coords", &coords]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["V"], json!(["0", "2"]));
    assert_eq!(r["result"]["orthogonal"]["satisfied"], false);
    assert_eq!(r["result"]["hermitian"]["satisfied"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(bellows(&["volume", "--nope"]).status.code(), Some(1));
    assert_eq!(bellows(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bellows(&["--help"]).status.code(), Some(0));
    assert_eq!(bellows(&["validate", "--cycle", "/nonexistent/cycle.json"]).status.code(), Some(3));
    assert_eq!(bellows(&["collapse", "--n", "3", "--vertices", "4", "--vol-tol", "0"]).status.code(), Some(1));
    let s = Scratch::new("codes");
    let broken = s.path("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(bellows(&["validate", "--cycle", &broken]).status.code(), Some(1));
    let out = bellows(&["collapse", "--n", "3", "--vertices", "4", "--out", "/nonexistent/dir/r.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_documents_schemas() {
    let out = bellows(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["cycle", "coords", "profile", "family", "poset", "Exit codes"] {
        assert!(text.contains(key), "help lacks {key}");
    }
}
