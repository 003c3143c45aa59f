use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(args)
        .env("CONELAB_THREADS", "2")
        .output()
        .unwrap()
}

fn write_spec(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn project_soc_point() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "soc3.json", r#"{"type": "second_order", "dim": 3}"#);
    let v = json(&conelab(&["project", "--spec", &spec, "--point", "1,0,0"]));
    let p = floats(&v["result"]["point"]);
    for (a, b) in p.iter().zip([0.5, 0.0, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(v["meta"]["command"], "project");
    assert_eq!(v["meta"]["seed"], 0);
    assert_eq!(v["meta"]["spec_sha256"].as_str().unwrap().len(), 64);

    let inside = json(&conelab(&["project", "--spec", &spec, "--point", "0.3,0.4,1"]));
    assert_eq!(inside["result"]["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn malformed_spec_exits_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.json", "{\"type\": \"psd\",\n  \"n\": }");
    let out = conelab(&["project", "--spec", &spec, "--point", "1,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column"), "{err}");
}

#[test]
fn dimension_mismatch_exits_1() {
    let out = conelab(&["project", "--spec", r#"{"type": "psd", "n": 2}"#, "--point", "1,0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn never_overwrites_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "o.json", r#"{"type": "nonnegative_orthant", "dim": 2}"#);
    let out = dir.path().join("r.json");
    let o = out.to_str().unwrap();
    let args = ["project", "--spec", &spec, "--point", "1,-1", "--out", o];
    assert!(conelab(&args).status.success());
    fs::write(&out, "keep").unwrap();
    assert_eq!(conelab(&args).status.code(), Some(1));
    assert_eq!(fs::read_to_string(&out).unwrap(), "keep");
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(conelab(&forced).status.success());
    assert!(fs::read_to_string(&out).unwrap().contains("\"result\""));
}

#[test]
fn reports_are_byte_identical_for_a_seed() {
    let spec = r#"{"type": "psd", "n": 2}"#;
    let args = ["probe-blr", "--spec", spec, "--face", "psd:range=[1;0]", "--region", "0,0,0,2", "--seed", "11", "--samples", "200"];
    let a = conelab(&args);
    let b = conelab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["meta"]["seed"], 11);
    assert_eq!(v["result"]["verdict"], "bounded");
}

#[test]
fn probe_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "o3.json", r#"{"type": "nonnegative_orthant", "dim": 3}"#);
    let out = dir.path().join("probe.json");
    let st = conelab(&[
        "probe-amenability", "--spec", &spec, "--face", "orthant:zero=0", "--region", "0,0.5,0.5,1",
        "--samples", "200", "--format", "both", "--out", out.to_str().unwrap(),
    ]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["verdict"], "bounded");
    assert!((v["result"]["kappa_hat"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,dist_face,dist_cone,ratio"));
    assert_eq!(lines.count(), 400);
}

#[test]
fn unresolvable_face_exits_1() {
    let out = conelab(&["probe-amenability", "--spec", r#"{"type": "psd", "n": 2}"#, "--face", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_registered_and_unknown_checks() {
    let v = json(&conelab(&["verify", "det_M"]));
    assert_eq!(v["result"]["all_passed"], true);
    assert_eq!(v["result"]["checks"][0]["name"], "det_M");
    let out = conelab(&["verify", "unknown"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sung_tam_gallery"));
}

#[test]
fn face_subcommands() {
    let kt = r#"{"type": "gallery", "name": "cylinder_K_tilde"}"#;
    let v = json(&conelab(&["face", "conjugate", "--spec", kt, "--face", "ray=[1,0,1,1]"]));
    assert_eq!(v["result"]["dim"], 2);
    let psd = r#"{"type": "psd", "n": 2}"#;
    let v = json(&conelab(&["face", "minimal", "--spec", psd, "--point", "1,0,0"]));
    assert_eq!(v["result"]["dim"], 1);
    let v = json(&conelab(&["face", "exposed", "--spec", psd, "--face", "psd:range=[1;0]", "--samples", "300"]));
    assert_eq!(v["result"]["status"], "exposed");
}

#[test]
fn build_projection_and_sung_tam() {
    let o = r#"{"type": "nonnegative_orthant", "dim": 3}"#;
    let v = json(&conelab(&["build-projection", "--spec", o, "--point", "1,0,0", "--point", "0,1,0", "--samples", "500"]));
    assert_eq!(v["result"]["certified"], true);
    let v = json(&conelab(&["sung-tam", "--spec", o, "--face", "orthant:zero=1"]));
    assert_eq!(v["result"]["outcome"]["outcome"], "no_converging_sequence_found");
}

#[test]
fn constants_for_lifted_disk() {
    let kt = r#"{"type": "gallery", "name": "cylinder_K_tilde"}"#;
    let v = json(&conelab(&["constants", "--spec", kt, "--face", "gallery:lifted_disk"]));
    let c = &v["result"]["constants"];
    assert!((c["alpha"].as_f64().unwrap() + (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
    assert!((c["r"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn plot_data_det_m_csv() {
    let out = conelab(&["plot-data", "det-m"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,s,numeric,closed_form,bracket\n"));
    assert_eq!(text.lines().count(), 1226);
}
