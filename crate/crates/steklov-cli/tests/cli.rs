//! End-to-end runs of the `steklov` binary.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::OnceLock;

/// Cache shared by the tests of this binary so the disk spectrum is solved once.
fn cache_dir() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("steklov-cli-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    })
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(args)
        .env("STEKLOV_CACHE_DIR", cache_dir())
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn dirichlet_capacitance_of_unit_disk() {
    let v = json(&["capacitance", "--radius", "1", "--kappa", "inf"]);
    let c = v["capacitance"][0]["C"].as_f64().unwrap();
    let expected: f64 = "0.6366".parse().unwrap();
    assert!((c - expected).abs() / expected < 5e-3, "C = {c}");
    assert_eq!(v["capacitance"][0]["kappa"], "inf");
}

#[test]
fn single_patch_oracle_example() {
    let v = json(&["sn-oracle", "--angles", "0.2", "--nmax", "1000", "--neigs", "1"]);
    let s = v["eigenvalues"][0]["sigma"].as_f64().unwrap();
    assert_eq!(format!("{s:.4}"), "4.0080");
    assert_eq!(v["run"][0]["n_max"], 1000);
}

#[test]
fn chords_and_angles_give_the_same_patch() {
    let chord = 2.0 * (0.1f64).sin();
    let a = json(&["sn-oracle", "--angles", "0.2", "--nmax", "200", "--neigs", "2"]);
    let b = json(&["sn-oracle", "--chords", &chord.to_string(), "--nmax", "200", "--neigs", "2"]);
    for i in 0..2 {
        let x = a["eigenvalues"][i]["sigma"].as_f64().unwrap();
        let y = b["eigenvalues"][i]["sigma"].as_f64().unwrap();
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn malformed_layout_exits_2_without_output() {
    let path = std::env::temp_dir().join(format!("steklov-bad-layout-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"size": {"angle": 0.1}, "patches": [{"center": [0, 0"#).unwrap();
    let out = run(&["mfrt", "--layout", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["exit_code"], 2);
    assert_eq!(diag["kind"], "parse");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn overlapping_patches_are_a_config_error() {
    let out = run(&["mfrt", "--preset", "fibonacci", "--count", "50", "--angle", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn pole_exits_3_with_diagnostic() {
    let out = run(&["capacitance", "--kappa=-1.1577738837"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "error");
    assert_eq!(diag["kind"], "pole");
}

#[test]
fn too_many_branches_is_numerical() {
    let out = run(&["sn", "--preset", "single", "--angle", "0.1", "--branches", "500"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flag_combination_exits_2() {
    let out = run(&["mfrt", "--preset", "single", "--angle", "0.1", "--chord", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["capacitance", "--kappa", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["mfrt", "--preset", "fibonacci", "--count", "4", "--angle", "0.05", "--kappa", "3", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cached_and_fresh_spectra_agree() {
    let args = ["monopole", "--kappa", "0.5,inf", "--format", "csv"];
    let cached = run(&args);
    let fresh =
        Command::new(env!("CARGO_BIN_EXE_steklov")).args(args).env_remove("STEKLOV_CACHE_DIR").output().unwrap();
    assert!(cached.status.success() && fresh.status.success());
    assert_eq!(cached.stdout, fresh.stdout);
    assert!(std::fs::read_dir(cache_dir()).unwrap().count() >= 1);
}

#[test]
fn splitting_sums_to_one() {
    let v = json(&["splitting", "--preset", "platonic", "--count", "6", "--chord", "0.1", "--kappa", "2"]);
    let defect = v["splitting_sum"][0]["sum_minus_one"].as_f64().unwrap();
    assert!(defect.abs() < 1e-10);
    let total: f64 = v["splitting_values"].as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn sdn_requires_dirichlet_partners() {
    let out = run(&["sdn", "--preset", "antipodal", "--angle", "0.1", "--kappa", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&["sdn", "--preset", "antipodal", "--angle", "0.1"]);
    let first = v["branches"][0]["sigma(eps=0.1)"].as_f64().unwrap();
    assert_eq!(format!("{first:.4}"), "0.5561");
}

#[test]
fn sn_lists_near_resonant_branches_for_identical_patches() {
    let v = json(&["sn", "--preset", "antipodal", "--angle", "0.2", "--branches", "2"]);
    let rows = v["branches"].as_array().unwrap();
    let regimes: Vec<&str> = rows.iter().map(|r| r["regime"].as_str().unwrap()).collect();
    assert_eq!(regimes.iter().filter(|r| **r == "sn_near_resonant").count(), 3);
    assert_eq!(regimes.iter().filter(|r| **r == "sn_nonresonant").count(), 2);
    let first = rows[0]["sigma(eps=0.2)"].as_f64().unwrap();
    assert!((first - 1.0075).abs() < 1e-3);
}

#[test]
fn homogenization_matches_limit_form_at_infinite_kappa() {
    let v = json(&["homog", "--eps", "0.02", "--count", "200"]);
    let row = &v["homogenization"][0];
    let a = row["k_eff"].as_f64().unwrap();
    let b = row["k_eff_limit_form"].as_f64().unwrap();
    // E comes from quadrature here, accurate to about 1e-7.
    assert!((a - b).abs() < 1e-6 * a);
    assert_eq!(row["limit_form"], "large_kappa");
}

#[test]
fn reproduce_reports_pass() {
    for table in ["tableC1", "table1", "eq722"] {
        let v = json(&["reproduce", table]);
        assert_eq!(v["summary"][0]["all_pass"], true, "{table}");
    }
}

#[test]
fn reproduce_oracle_tables_pass() {
    let v = json(&["reproduce", "tableF1"]);
    assert_eq!(v["summary"][0]["all_pass"], true);
    assert_eq!(v["summary"][0]["entries"], 5);
}

#[test]
fn shape_of_fine_polygon_matches_disk() {
    let pts: Vec<String> = (0..256)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 256.0;
            format!("[{},{}]", t.cos(), t.sin())
        })
        .collect();
    let v = json(&["shape", "--boundary-json", &format!("[{}]", pts.join(","))]);
    let c2 = v["shape"][0]["c2"].as_f64().unwrap();
    assert!((c2 - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-3, "c2 = {c2}");
    let out = run(&["shape", "--boundary-json", "[[0,0],[0,1],[1,1],[1,0]]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
