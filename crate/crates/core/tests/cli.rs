use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isoalg"))
}

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

fn isoalg(args: &[&str]) -> Output {
    bin().env_remove("ISOALG_TOL").args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn run_checks(file: &str, checks: &str) -> Output {
    isoalg(&["run", "--model", model(file).to_str().unwrap(), "--checks", checks])
}

#[test]
fn nf_collapses_uu_star_u() {
    let out = isoalg(&["nf", "--expr", "U*U'*U", "--model", model("polar.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let degrees = v["degrees"].as_array().unwrap();
    assert_eq!(degrees.len(), 1, "{v}");
    assert_eq!(degrees[0]["k"], 1);
}

#[test]
fn full_run_on_polar_passes() {
    let out = run_checks("polar.json", "all");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"theorem_5_1"));
    assert!(!names.contains(&"prop_5_4"));
    assert!(v["norm_limit"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn qdeform_relations_pass_with_bulk_defects_zero() {
    let out = run_checks("qdeform.json", "prop_5_4");
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let suite = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "prop_5_4").unwrap();
    // dependencies are pulled in
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "model_conditions"));
    for d in suite["report"]["defects"].as_array().unwrap() {
        if d["check"].as_str().unwrap().contains("(bulk)") {
            assert!(d["value"].as_f64().unwrap() <= 1e-13, "{d}");
        }
    }
}

#[test]
fn broken_models_exit_one() {
    for (file, failing) in [
        ("broken_noncentral.json", "prop_2_2"),
        ("broken_constant_rho.json", "model_conditions"),
        ("broken_polar.json", "model_conditions"),
    ] {
        let out = run_checks(file, "model_conditions,prop_2_2,coefficient_algebra");
        assert_eq!(out.status.code(), Some(1), "{file}");
        let v = json(&out);
        assert_eq!(v["pass"], false);
        let check = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == failing).unwrap();
        assert_eq!(check["status"], "fail", "{file}");
    }
}

#[test]
fn unknown_check_lists_registry() {
    let out = run_checks("polar.json", "prop_2_2,no_such_check");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no_such_check"), "{err}");
    for name in ["model_conditions", "lemma_2_8", "norm_limit", "theorem_5_1", "prop_5_4"] {
        assert!(err.contains(name), "missing {name} in: {err}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{\"type\": \"qdeform\", \"n\": 4").unwrap();
    let unknown_type = dir.path().join("unknown.json");
    std::fs::write(&unknown_type, r#"{"type": "cubic"}"#).unwrap();
    let polar = model("polar.json");
    let polar = polar.to_str().unwrap();
    let missing = dir.path().join("missing.json");

    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--model", bad_json.to_str().unwrap()],
        vec!["run", "--model", unknown_type.to_str().unwrap()],
        vec!["run", "--model", missing.to_str().unwrap()],
        vec!["run", "--model", polar, "--tol", "-1"],
        vec!["run", "--model", polar, "--k-max", "0"],
        vec!["nf", "--model", polar, "--expr", "U*(absa"],
        vec!["nf", "--model", polar, "--expr", "V*U"],
        vec!["frobnicate"],
        vec!["run"],
    ];
    for args in cases {
        let out = isoalg(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn tolerance_from_environment() {
    let out = bin()
        .env("ISOALG_TOL", "-1")
        .args(["closure", "--model", model("polar.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let args = |seed: &str| {
        vec![
            "run".to_string(),
            "--model".into(),
            model("qdeform.json").to_str().unwrap().into(),
            "--checks".into(),
            "homomorphism,property_star,norm_limit,gauge_invariance".into(),
            "--seed".into(),
            seed.into(),
            "--samples".into(),
            "40".into(),
            "--norm-samples".into(),
            "10".into(),
        ]
    };
    let run = |seed: &str| bin().env_remove("ISOALG_TOL").args(args(seed)).output().unwrap();
    let (a, b) = (run("3"), run("3"));
    assert_eq!(a.status.code(), b.status.code());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run("4").stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let m = model("polar.json");
    let base = ["run", "--model", m.to_str().unwrap(), "--checks", "lemma_2_8,theorem_5_1"];
    let stdout = isoalg(&base).stdout;
    let mut with_out = base.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = isoalg(&with_out);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn closure_reports_tower_dimensions() {
    let out = isoalg(&["closure", "--model", model("qdeform.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["condition_3_6"], true);
    assert_eq!(v["estar_e_dimension"], 12);
    assert_eq!(v["system_dimension"], 12);
}

#[test]
fn norm_limit_on_expression() {
    let out = isoalg(&[
        "norm-limit",
        "--model",
        model("polar_shift.json").to_str().unwrap(),
        "--expr",
        "U + absa",
        "--samples",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let trace = &v["traces"][0];
    assert_eq!(trace["k_values"], serde_json::json!([1, 2, 4, 8]));
    let direct = trace["direct_norm"].as_f64().unwrap();
    let last = trace["s_values"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!(last <= direct * (1.0 + 1e-9) && last >= direct / 129f64.powf(1.0 / 32.0));
}

#[test]
fn polar_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, r#"{"dim": 2, "entries": [[[0,0],[2,0]],[[0,0],[0,0]]]}"#).unwrap();
    let out = isoalg(&["polar", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["relative_residual"].as_f64().unwrap() <= 1e-15);
    assert!(v["aa_star_in_a0_defect"].as_f64().unwrap() <= 1e-12);
}
