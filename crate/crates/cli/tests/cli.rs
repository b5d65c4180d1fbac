use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sasakit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sasakit"))
        .args(args)
        .current_dir(dir)
        .env_remove("SASAKIT_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn diagram(dir: &TempDir, name: &str, normals: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, format!(r#"{{"rank": 3, "normals": {normals}}}"#)).unwrap();
    path
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    diagram(&dir, "lens2.json", "[[1,0,0],[0,1,0],[1,1,2]]");
    diagram(&dir, "octant.json", "[[1,0,0],[0,1,0],[0,0,1]]");
    diagram(&dir, "nogamma.json", "[[1,0,0],[0,1,0],[0,0,1],[1,1,-2]]");
    diagram(&dir, "dup.json", "[[1,0,0],[1,0,0],[0,0,1]]");
    // step (1,2) -> (1,0) -> (0,0) has a non-primitive edge (0,-2)
    diagram(&dir, "notgood.json", "[[1,0,0],[1,2,3],[1,0,1]]");
    dir
}

#[test]
fn check_good_lens() {
    let dir = setup();
    let out = sasakit(&["check", "lens2.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["goodness"]["good"], true);
    assert_eq!(r["validation"]["valid"], true);
    assert_eq!(r["tool"], "sasakit");
    assert_eq!(r["float_precision"], 12);
    assert!(r.get("reeb").is_none());
    assert!(r.get("timing_ms").is_none());
}

#[test]
fn check_duplicate_normal() {
    let dir = setup();
    let out = sasakit(&["check", "dup.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("redundant"));
    assert_eq!(json(&out)["validation"]["valid"], false);
}

#[test]
fn check_not_good_names_edge() {
    let dir = setup();
    let out = sasakit(&["check", "notgood.json"], dir.path());
    assert_eq!(code(&out), 2);
    let r = json(&out);
    assert_eq!(r["goodness"]["good"], false);
    assert_eq!(r["goodness"]["failure"]["normals"], serde_json::json!([1, 2]));
    assert_eq!(r["goodness"]["failure"]["kind"], "not_saturated");
    assert!(stderr(&out).contains("normals [1, 2]"));
}

#[test]
fn malformed_input() {
    let dir = setup();
    std::fs::write(dir.path().join("broken.json"), "{\"rank\": 3, \"normals\": [[1,0]").unwrap();
    assert_eq!(code(&sasakit(&["check", "broken.json"], dir.path())), 1);
    assert_eq!(code(&sasakit(&["check", "missing.json"], dir.path())), 1);
    std::fs::write(
        dir.path().join("wrong_gamma.json"),
        r#"{"rank": 3, "normals": [[1,0,0],[0,1,0],[1,1,2]], "gamma": ["-1", "-1", "1/3"]}"#,
    )
    .unwrap();
    assert_eq!(code(&sasakit(&["check", "wrong_gamma.json"], dir.path())), 1);
    assert_eq!(code(&sasakit(&["check"], dir.path())), 1);
    assert_eq!(code(&sasakit(&["analyze", "lens2.json", "--bogus"], dir.path())), 1);
}

#[test]
fn analyze_lens_cy_topology() {
    let dir = setup();
    let out = sasakit(&["analyze", "lens2.json", "--cy", "--topo"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["cy"]["gamma"], serde_json::json!(["-1", "-1", "1/2"]));
    assert_eq!(r["cy"]["height"], 2);
    for n in r["cy"]["normalized_normals"].as_array().unwrap() {
        assert_eq!(n[0], 2);
    }
    assert_eq!(r["topology"]["pi1"], serde_json::json!([2]));
    assert_eq!(r["topology"]["b2"], 0);
    assert!(r.get("reeb").is_none());
}

#[test]
fn analyze_octant_reeb() {
    let dir = setup();
    let out = sasakit(&["analyze", "octant.json", "--reeb", "--starts", "3"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let reeb = &json(&out)["reeb"];
    for x in reeb["xi"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() < 1e-6);
    }
    assert!((reeb["volume"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);
    assert!(reeb["gradient_norm"].as_f64().unwrap() < 1e-8);
    assert_eq!(reeb["quasi_regular"], true);
    assert_eq!(reeb["starts"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_reeb_without_gamma() {
    let dir = setup();
    let out = sasakit(&["analyze", "nogamma.json", "--reeb"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no toric diagram structure; c₁(D) = 0 fails"));
    let out = sasakit(&["analyze", "nogamma.json", "--cy"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["cy"]["present"], false);
}

#[test]
fn analyze_not_good_exits_2() {
    let dir = setup();
    assert_eq!(code(&sasakit(&["analyze", "notgood.json", "--cy"], dir.path())), 2);
}

#[test]
fn family_outputs() {
    let dir = setup();
    let out = sasakit(&["family", "lens", "--l", "3"], dir.path());
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["normals"], serde_json::json!([[1, 0, 0], [0, 1, 0], [1, 1, 3]]));
    assert_eq!(r["gamma"], serde_json::json!(["-1", "-1", "1/3"]));
    assert_eq!(r["height"], 3);

    let out = sasakit(&["family", "main4-even", "--r", "1", "--s", "1"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["normals"].as_array().unwrap().len(), 5);

    let out = sasakit(&["family", "non-cy", "--l", "2"], dir.path());
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["normals"].as_array().unwrap().len(), 4);
    assert!(r.get("gamma").is_none());

    let out = sasakit(&["family", "z5-lens"], dir.path());
    assert_eq!(json(&out)["height"], 1);
}

#[test]
fn family_errors() {
    let dir = setup();
    for args in [
        &["family", "main4-odd", "--r", "0"][..],
        &["family", "lens"],
        &["family", "lens", "--l", "0"],
        &["family", "torus"],
        &["family", "main4-even", "--r", "1", "--s", "0"],
    ] {
        let out = sasakit(args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn family_round_trips_through_check() {
    let dir = setup();
    let out = sasakit(&["family", "main4-odd", "--r", "2", "--s", "1"], dir.path());
    std::fs::write(dir.path().join("odd.json"), &out.stdout).unwrap();
    let out = sasakit(&["check", "odd.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = sasakit(&["family", "non-cy", "--l", "2"], dir.path());
    std::fs::write(dir.path().join("noncy.json"), &out.stdout).unwrap();
    let out = sasakit(&["check", "noncy.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("redundant"));
}

#[test]
fn deterministic_output() {
    let dir = setup();
    let fam = sasakit(&["family", "main4-even", "--r", "2", "--s", "1"], dir.path());
    std::fs::write(dir.path().join("even.json"), &fam.stdout).unwrap();
    let args = [
        "analyze",
        "even.json",
        "--cy",
        "--topo",
        "--reeb",
        "--starts",
        "4",
        "--potential-grid",
        "6",
        "--grid-out",
        "grid.csv",
    ];
    let a = sasakit(&args, dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let grid_a = std::fs::read(dir.path().join("grid.csv")).unwrap();
    let b = sasakit(&args, dir.path());
    let grid_b = std::fs::read(dir.path().join("grid.csv")).unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(grid_a, grid_b);
    assert_eq!(sasakit(&["family", "main4-even", "--r", "2", "--s", "1"], dir.path()).stdout, fam.stdout);
}

#[test]
fn potential_grid_csv() {
    let dir = setup();
    let out = sasakit(
        &["analyze", "lens2.json", "--reeb", "--potential-grid", "4", "--grid-out", "g.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "y1,y2,y3,G,x1,x2,x3,F,roundtrip_residual,hessian_inverse_residual,identity_residual"
    );
    assert_eq!(lines.len(), 5);
    let grid = &json(&out)["potential_grid"];
    assert!(grid["max_roundtrip_residual"].as_f64().unwrap() < 1e-9);
    assert!(grid["max_identity_residual"].as_f64().unwrap() < 1e-9);
    assert!(grid["max_hessian_inverse_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn volume_rays_and_svg() {
    let dir = setup();
    let fam = sasakit(&["family", "z5-lens"], dir.path());
    std::fs::write(dir.path().join("z5.json"), &fam.stdout).unwrap();
    let out = sasakit(
        &[
            "analyze", "z5.json", "--reeb", "--ray", "0,1,0", "--ray-out", "rays.csv", "--emit-svg",
            "z5.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("rays.csv")).unwrap();
    let volumes: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(volumes.len(), 32);
    assert!(volumes[1..].iter().all(|&v| v >= volumes[0]));
    assert!(volumes[volumes.len() - 5..].windows(2).all(|w| w[1] > w[0]));
    let svg = std::fs::read_to_string(dir.path().join("z5.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<title>").count(), 3);
}

#[test]
fn timing_only_when_requested() {
    let dir = setup();
    let out = sasakit(&["analyze", "octant.json", "--topo", "--timing"], dir.path());
    let r = json(&out);
    assert!(r["timing_ms"]["topology"].is_number());
}

#[test]
fn geodesic_suite() {
    let dir = setup();
    let out = sasakit(&["geodesic-test", "octant.json", "--pair", "ratio"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-4);
    assert!(r["min_order"].as_f64().unwrap() >= 1.8);
    for p in r["points"].as_array().unwrap() {
        assert!(p["reeb_invariance_residual"].as_f64().unwrap() < 1e-6);
    }

    let out = sasakit(&["geodesic-test", "octant.json", "--pair", "square"], dir.path());
    assert_eq!(code(&out), 0);
    for p in json(&out)["points"].as_array().unwrap() {
        assert!(p["reeb_invariance_residual"].as_f64().unwrap() >= 0.1);
    }
}
