//! End-to-end tests of the `gmob` binary: subcommand output, exit codes,
//! and file round trips.

use std::process::{Command, Output};

fn gmob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmob"))
        .args(args)
        .output()
        .expect("failed to run gmob")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn corpus_list_names_every_entry() {
    let o = gmob(&["corpus", "list"]);
    assert!(o.status.success());
    let names: Vec<String> = serde_json::from_str(&stdout(&o)).unwrap();
    for want in ["flat3", "sphere2", "example1", "example2"] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
}

#[test]
fn export_is_byte_stable_and_round_trips() {
    let o1 = gmob(&["corpus", "export", "sphere2"]);
    let o2 = gmob(&["corpus", "export", "sphere2"]);
    assert!(o1.status.success());
    assert_eq!(o1.stdout, o2.stdout, "export output is not byte-stable");

    let dir = std::env::temp_dir().join("gmob-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sphere2.json");
    std::fs::write(&path, &o1.stdout).unwrap();
    let o = gmob(&[
        "geom",
        "curvature",
        path.to_str().unwrap(),
        "--point",
        "0.1,0.2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 2);
    assert!(v["max_abs_riemann"].as_f64().unwrap() > 0.1);
}

#[test]
fn degree_of_flat_space_is_maximal() {
    let o = gmob(&["mobility", "degree", "corpus:flat3", "--B", "0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["D"], 10);
    assert_eq!(v["seed"], 42);
}

#[test]
fn seed_flag_is_echoed() {
    let o = gmob(&["--seed", "7", "mobility", "degree", "corpus:sphere2", "--B", "-1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["D"], 6);
}

#[test]
fn malformed_input_exits_1_with_json_error() {
    let o = gmob(&["corpus", "export", "nosuch"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["exit_code"], 1);
    assert!(err["error"].as_str().unwrap().contains("nosuch"));
}

#[test]
fn indecision_exits_2() {
    let dir = std::env::temp_dir().join("gmob-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("amb_g.json");
    let l = dir.join("amb_l.json");
    std::fs::write(&g, "[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
    // eigenvalue separation 3e-6 sits between tol·‖L‖ and 10·tol·‖L‖
    std::fs::write(&l, "[[1,0,0],[0,1.000003,0],[0,0,5]]").unwrap();
    let o = gmob(&[
        "canonical",
        "form",
        "--G",
        g.to_str().unwrap(),
        "--L",
        l.to_str().unwrap(),
        "--tol",
        "1e-7",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verification_failure_exits_3() {
    let o = gmob(&["cone", "check", "corpus:sphere2", "--v", "x1"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cone_check_accepts_true_cone() {
    let o = gmob(&["cone", "check", "corpus:example2", "--v", "r^2/2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cone_compatible"], true);
}

#[test]
fn cone_build_output_feeds_back_in() {
    let o = gmob(&["cone", "build", "corpus:sphere2"]);
    assert!(o.status.success());
    let dir = std::env::temp_dir().join("gmob-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cone_s2.json");
    std::fs::write(&path, &o.stdout).unwrap();
    // the cone over the unit sphere is flat
    let o = gmob(&["geom", "curvature", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_abs_riemann"].as_f64().unwrap() < 1e-10);
}

#[test]
fn pairs_analyze_certifies_companion() {
    let o = gmob(&["pairs", "analyze", "corpus:flat_projective_pair3", "companion"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["equivalent"], true);
}

#[test]
fn pairs_projective_inline_field() {
    let o = gmob(&[
        "pairs",
        "projective",
        "corpus:flat3",
        "--field",
        "x1*x1,x1*x2,x1*x3",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_projective"], true);

    let o = gmob(&["pairs", "projective", "corpus:flat3", "--field", "x1^3,0,0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_projective"], false);
}

#[test]
fn canonical_form_reports_blocks() {
    let dir = std::env::temp_dir().join("gmob-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("rot_g.json");
    let l = dir.join("rot_l.json");
    std::fs::write(&g, "[[0,1],[1,0]]").unwrap();
    std::fs::write(&l, "[[0,1],[-1,0]]").unwrap();
    let o = gmob(&[
        "canonical",
        "form",
        "--G",
        g.to_str().unwrap(),
        "--L",
        l.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["blocks"].as_array().unwrap().len(), 1);
    assert_eq!(v["blocks"][0]["size"], 2);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
}
