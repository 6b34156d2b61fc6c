use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minksep")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn num(v: &Value, k: &str) -> f64 {
    v[k].as_f64().unwrap_or_else(|| panic!("{k} missing in {v}"))
}

#[test]
fn classify_radial_tensor() {
    let v = json_of(&run(&["classify", r#"{"A":0,"w":0,"m":1}"#]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["class"], "central");
    assert_eq!(v["reducible"], true);
    let webs: Vec<u64> = v["webs"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(webs.contains(&16));
}

#[test]
fn classify_ellipsoidal_tensor() {
    let v = json_of(&run(&["classify", r#"{"A":[[0,0,0],[0,1,0],[0,0,2]],"w":[0,0,0],"m":1}"#]));
    assert_eq!(v["class"], "central");
    assert_eq!(v["reducible"], false);
    assert_eq!(v["webs"], serde_json::json!([29]));
}

#[test]
fn classify_rejects_bad_input() {
    // antisymmetric after lowering
    assert_eq!(code(&run(&["classify", r#"{"A":[[0,-1,0],[-1,0,0],[0,0,0]],"w":0,"m":0}"#])), 3);
    assert_eq!(code(&run(&["classify", r#"{"A":[0,1],"w":0,"m":0}"#])), 2);
    assert_eq!(code(&run(&["classify", "{not json"])), 2);
    assert_eq!(code(&run(&["classify", "/nonexistent/ct.json"])), 2);
}

#[test]
fn chart_forward_and_inverse() {
    let v = json_of(&run(&["chart", "2", "1", "--triple", "1,2,1.5707963", "--forward"]));
    assert!((num(&v, "t") - 1.0).abs() < 1e-12);
    assert!(num(&v, "x").abs() < 1e-6);
    assert!((num(&v, "y") - 2.0).abs() < 1e-12);

    let v = json_of(&run(&[
        "chart", "29", "1", "--params", "a=1,b=2", "--point", "1.5,1.4142136,0.8660254", "--invert",
    ]));
    assert!((num(&v, "u") - 3.0).abs() < 1e-6);
    assert!((num(&v, "v") - 1.5).abs() < 1e-6);
    assert!((num(&v, "w") + 1.0).abs() < 1e-6);
    assert_eq!(v["in_range"], true);
}

#[test]
fn chart_errors() {
    let bad = run(&["chart", "29", "1", "--params", "a=2,b=1", "--point", "1.5,1.4142136,0.8660254", "--invert"]);
    assert_eq!(code(&bad), 2);
    assert_eq!(code(&run(&["chart", "99", "1", "--triple", "1,2,3"])), 2);
    assert_eq!(code(&run(&["chart", "2", "7", "--triple", "1,2,3"])), 2);
    assert_eq!(code(&run(&["chart", "2", "1", "--triple", "1,2"])), 2);
    // a spacelike point is outside the timelike region of 16.2
    assert_eq!(code(&run(&["chart", "16", "2", "--point", "0,1,0", "--invert"])), 4);
}

#[test]
fn verify_full_catalog() {
    let out = run(&["verify", "--samples", "100", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_of(&out);
    assert_eq!(v["summary"]["charts"], 88);
    assert_eq!(v["summary"]["passed"], 88);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn verify_filter_and_failure_exit() {
    let v = json_of(&run(&["verify", "--web", "45"]));
    assert_eq!(v["summary"]["charts"], 1);

    let out = run(&["verify", "--web", "29", "--tol", "1e-20", "--samples", "5"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failed"], 1);

    assert_eq!(code(&run(&["verify", "--web", "77"])), 2);
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["verify", "--web", "18", "--samples", "10", "--seed", "7"]);
    let b = run(&["verify", "--web", "18", "--samples", "10", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "--web", "18", "--samples", "10", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn json_outputs_are_fixpoints() {
    for args in [
        vec!["classify", r#"{"A":0,"w":0,"m":1}"#],
        vec!["chart", "2", "1", "--triple", "1,2,1.5707963"],
        vec!["verify", "--web", "31", "--samples", "3"],
        vec!["export", "catalog"],
    ] {
        let out = run(&args);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let again = serde_json::to_string_pretty(&v).unwrap();
        let v2: Value = serde_json::from_str(&again).unwrap();
        assert_eq!(v, v2, "{args:?}");
        assert_eq!(again, serde_json::to_string_pretty(&v2).unwrap());
    }
}

#[test]
fn export_catalog_counts() {
    let dir = tempdir();
    let path = dir.join("webs.json");
    let out = run(&["export", "catalog", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    let webs = v["webs"].as_array().unwrap();
    assert_eq!(webs.len(), 45);
    let charts: usize = webs.iter().map(|w| w["charts"].as_array().unwrap().len()).sum();
    assert_eq!(charts, 88);
    // formulas travel as prefix ASTs
    let map = &webs[1]["charts"][0]["map"];
    assert!(map.to_string().contains("(* v (cos w))"), "{map}");
}

#[test]
fn export_surface_grid() {
    let dir = tempdir();
    let path = dir.join("s.csv");
    let out = run(&["export", "surface", "16", "2", "--fix", "u=1", "--grid", "20", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,v,w,t,x,y");
    assert_eq!(lines.len(), 401);
    assert!(lines[1..].iter().all(|l| l.starts_with("1,")));

    assert_eq!(code(&run(&["export", "surface", "99", "1", "--fix", "u=1"])), 2);
    assert_eq!(code(&run(&["export", "surface", "16", "2", "--fix", "q=1"])), 2);
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("minksep-cli-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
