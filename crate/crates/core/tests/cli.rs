use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn alexot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alexot")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn line_instance(xs: &[f64], ys: &[f64]) -> String {
    let atoms = |v: &[f64]| {
        let w = 1.0 / v.len() as f64;
        v.iter().map(|x| format!(r#"{{"point":[{x},0.0],"weight":{w}}}"#)).collect::<Vec<_>>().join(",")
    };
    format!(
        r#"{{"space":{{"kind":"plane"}},"cost":{{"kind":"quadratic"}},"source":{{"atoms":[{}]}},"target":{{"atoms":[{}]}}}}"#,
        atoms(xs),
        atoms(ys)
    )
}

#[test]
fn identical_measures_cost_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "id.json", &line_instance(&[0.0, 1.0, 2.5], &[0.0, 1.0, 2.5]));
    let o = alexot(&["solve", &p, "--oracle"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["cost"].as_f64().unwrap(), 0.0);
    assert_eq!(v["oracle"]["agrees"], Value::Bool(true));
    assert_eq!(v["plan"].as_array().unwrap().len(), 3);
}

#[test]
fn two_points_on_a_line_are_matched_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "line.json", &line_instance(&[0.0, 1.0], &[0.5, 1.5]));
    let o = alexot(&["solve", &p]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    // c = d²/2 and each half unit of mass moves 0.5
    assert!((v["cost"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-12);
    for e in v["plan"].as_array().unwrap() {
        assert_eq!(e[0], e[1]);
    }
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"space\": ");
    let o = alexot(&["solve", &p]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:1:"), "{err}");
    assert_eq!(code(&alexot(&["solve", "/nonexistent/instance.json"])), 2);
}

#[test]
fn oracle_refuses_large_instances() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "big.json", &line_instance(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[0.5, 1.5, 2.5]));
    assert_eq!(code(&alexot(&["solve", &p, "--oracle"])), 3);
}

#[test]
fn curvature_verdicts_set_the_exit_code() {
    let pass = alexot(&["verify", "curvature", "cone:1.5pi", "--samples", "3000", "--seed", "1"]);
    assert_eq!(code(&pass), 0);
    assert_eq!(stdout_json(&pass)["passed"], Value::Bool(true));
    // the unit sphere is not an Alexandrov space of curvature ≥ 2
    let fail = alexot(&["verify", "curvature", "sphere:1", "--k", "2", "--samples", "3000"]);
    assert_eq!(code(&fail), 1);
    assert!(stdout_json(&fail)["witness"].is_object());
    // cones wider than 2π exist but violate the comparison at the apex
    assert_eq!(code(&alexot(&["verify", "curvature", "cone:3pi", "--samples", "3000"])), 1);
    assert_eq!(code(&alexot(&["verify", "curvature", "cone:-1"])), 2);
}

#[test]
fn first_variation_on_the_sphere() {
    let o = alexot(&["verify", "first-variation", "sphere:1", "--samples", "20", "--t-values", "0.1,0.01,0.001"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["worst_ratio"].as_f64().unwrap() <= 10.0);
}

#[test]
fn generation_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "generate",
            "--space",
            "cone:1.5pi",
            "--region",
            "annulus:0.5,2",
            "--n",
            "25",
            "--targets",
            "4",
            "--random-weights",
            "--seed",
            "11",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([out.to_owned()])
        .collect::<Vec<_>>()
    };
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let args = args(p.to_str().unwrap());
        let o = alexot(&args.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    // the written instance is accepted back and re-serialises to the same bytes
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["source"]["atoms"].as_array().unwrap().len(), 25);
    let inst = alexot::instance::Instance::from_json(std::str::from_utf8(&ta).unwrap()).unwrap();
    let mut again = serde_json::to_vec_pretty(&inst).unwrap();
    again.push(b'\n');
    assert_eq!(again, ta);

    let dup = alexot(&["verify", "duality", a.to_str().unwrap()]);
    assert_eq!(code(&dup), 0);
    assert_eq!(stdout_json(&dup)["report"]["passed"], Value::Bool(true));
}

#[test]
fn empty_generation_is_rejected() {
    assert_eq!(code(&alexot(&["generate", "--space", "plane", "--n", "0"])), 2);
}

#[test]
fn translation_preset_has_no_split_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("t.json");
    let out = dir.path().join("report.json");
    assert_eq!(code(&alexot(&["generate", "--preset", "translation", "--out", inst.to_str().unwrap()])), 0);
    let o = alexot(&["verify", "map", inst.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["n_split"], 0);
    assert_eq!(r["verified"], 400);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 401);
    assert!(csv.starts_with("n,index,x0,x1,status"));
}

#[test]
fn map_refinement_and_uniqueness_on_a_cone() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("c.json");
    let gen = alexot(&[
        "generate",
        "--space",
        "cone:1.5pi",
        "--region",
        "annulus:0.5,2",
        "--n",
        "30",
        "--targets",
        "4",
        "--seed",
        "5",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);
    let csv = dir.path().join("atoms.csv");
    let map = alexot(&["verify", "map", inst.to_str().unwrap(), "--refine", "30,60", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&map), 0, "{}", String::from_utf8_lossy(&map.stdout));
    assert_eq!(stdout_json(&map)["reports"].as_array().unwrap().len(), 2);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 91);

    let u = alexot(&["verify", "uniqueness", inst.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(code(&u), 0);
    assert_eq!(stdout_json(&u)["report"]["disagreements"], 0);
}
