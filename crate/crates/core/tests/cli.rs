use std::path::Path;
use std::process::Command;

use smoothot::noise::softmax_probs;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smoothot"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn probs_matches_softmax() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "p.json",
        r#"{"model":{"kind":"exponential","lambda":0.5,"eta":[0.2,0.3,0.5]},"u":[0.1,-0.4,0.3]}"#,
    );
    let out = run_ok(bin().args(["probs", "--config"]).arg(&req));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let p: Vec<f64> = v["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let oracle = softmax_probs(&[0.1, -0.4, 0.3], &[0.2, 0.3, 0.5], 0.5).unwrap().p;
    for (a, b) in p.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn transform_from_point() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "t.json",
        r#"{"model":{"kind":"uniform","lambda":1.0,"eta":[0.5,0.5]},
            "phi":[0.0,0.0],"x":[0.0],
            "nu":{"atoms":[[0.0],[1.0]],"weights":[0.5,0.5]},
            "cost":{"kind":"p-norm-power","p":2.0}}"#,
    );
    let out = run_ok(bin().args(["transform", "--config"]).arg(&req));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["value"].as_f64().unwrap().is_finite());
    assert_eq!(v["method"], "sort");
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "s.json",
        r#"{"sampler":{"kind":"gaussian-standard","dim":2,"seed":0},
            "nu":{"atoms":[[0.0,0.0],[1.0,1.0]],"weights":[0.5,0.5]},
            "cost":{"kind":"sup-norm"},
            "model":{"kind":"hyperbolic","lambda":0.2,"eta":[0.5,0.5]},
            "horizon":500,"eps_bar":0.1,"seed":4}"#,
    );
    let a = run_ok(bin().args(["solve", "--seed", "9", "--config"]).arg(&req));
    let b = run_ok(bin().args(["solve", "--seed", "9", "--config"]).arg(&req));
    let c = run_ok(bin().args(["solve", "--config"]).arg(&req));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("t,phi_hash,subopt_estimate,walltime_ms\n"));
}

#[test]
fn volume_row() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "v.json",
        r#"{"instance":{"w":[1.0],"b":0.3,"p":2.0},"delta":0.01,"quadrature":{"kind":"grid","m":1000}}"#,
    );
    let out_path = dir.path().join("v.csv");
    run_ok(bin().args(["volume", "--tol", "0.001", "--config"]).arg(&req).arg("--out").arg(&out_path));
    let text = std::fs::read_to_string(out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "w,b,exact,t_hat,delta,quadrature,calls");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 0.3).abs() < 3e-3);
    assert_eq!(row[4], "0.001");
    assert_eq!(row[6], "22");
}

#[test]
fn reference_json() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "r.json",
        r#"{"sampler":{"kind":"hypercube-uniform","dim":1,"seed":0},
            "nu":{"atoms":[[0.25],[0.75]],"weights":[0.5,0.5]},
            "cost":{"kind":"p-norm-power","p":2.0},"horizon":10}"#,
    );
    let out = run_ok(bin().args(["reference", "--seed", "3", "--config"]).arg(&req));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["method"], "exact-transport");
    assert_eq!(v["samples"], 100);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "bad.json",
        r#"{"instance":{"w":[1.0],"b":-1.0},"delta":0.01,"quadrature":{"kind":"grid","m":10}}"#,
    );
    let out = bin().args(["volume", "--config"]).arg(&req).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`b`"));

    let cfg = write(dir.path(), "exp.json", r#"{"version":1}"#);
    let out = bin().args(["experiment", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampler"));
}

#[test]
fn experiment_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let printed = run_ok(bin().args(["experiment", "--preset", "gating", "--print-config"]));
    let mut cfg: serde_json::Value = serde_json::from_str(&printed).unwrap();
    cfg["horizons"] = serde_json::json!([20, 40, 80]);
    cfg["seeds"] = serde_json::json!([1, 2]);
    cfg["timing"] = serde_json::json!(false);
    let path = write(dir.path(), "cfg.json", &cfg.to_string());
    let out_dir = dir.path().join("run");
    let stdout = run_ok(bin().args(["experiment", "--workers", "2", "--config"]).arg(&path).arg("--out").arg(&out_dir));
    assert!(stdout.starts_with("model,subopt_slope"));
    let csv = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3 * 2);
    for f in ["subopt.svg", "potgap.svg", "slopes.csv", "metadata.json", "manifest.jsonl"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}
