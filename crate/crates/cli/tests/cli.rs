use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn droplet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_droplet"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn constants_table_for_kappa_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = droplet(&["constants", "--kappa", "2", "--out", "res"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("res/constants.csv")).unwrap();
    assert!(csv.trim_end().ends_with("# manifest: manifest.json"));
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let row = &rows(&csv)[0];
    let get = |name: &str| -> f64 {
        row[header.iter().position(|h| *h == name).unwrap()]
            .parse()
            .unwrap()
    };
    assert!((get("r_c") - 4.0).abs() < 1e-12);
    assert!((get("phi") - 25.13274).abs() < 1e-5);
    assert!((get("c1") - 0.66667).abs() < 1e-5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["experiment"], "constants");
    assert_eq!(manifest["config"]["params"]["kappa"], 2.0);
}

#[test]
fn expansion_residual_shrinks_with_eps() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "expansion-sweep",
        "--kappa",
        "2",
        "--eps",
        "0.1,0.05,0.025",
        "--n",
        "64",
        "--seed",
        "7",
        "--out",
        "res",
    ];
    let out = droplet(&args, dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("res/expansion-sweep.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "max_relative_residual")
        .unwrap();
    let residuals: Vec<f64> = rows(&csv).iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(residuals.len(), 3);
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let args = [
            "locality-agreement",
            "--replicas",
            "200",
            "--seed",
            "3",
            "--out",
            out,
        ];
        assert!(droplet(&args, dir.path()).status.success());
    };
    run("a");
    run("b");
    let read = |d: &str, f: &str| fs::read(dir.path().join(d).join(f)).unwrap();
    assert_eq!(
        read("a", "locality-agreement.csv"),
        read("b", "locality-agreement.csv")
    );
    let strip = |d: &str| {
        String::from_utf8(read(d, "manifest.json"))
            .unwrap()
            .replace(&format!("\"{d}\""), "")
    };
    assert_eq!(strip("a"), strip("b"));
}

#[test]
fn validate_config_reports_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"experiment":"gibbs-validate","params":{"kappa":0.5,"beta":-1,"L":3}}"#,
    )
    .unwrap();
    let out = droplet(&["validate-config", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["violations"].as_array().unwrap().len() >= 3, "{v}");

    let good = dir.path().join("good.json");
    fs::write(
        &good,
        r#"{"experiment":"constants","params":{"kappa":2,"beta":1,"L":40}}"#,
    )
    .unwrap();
    let out = droplet(&["validate-config", "--config", "good.json"], dir.path());
    assert!(out.status.success());
}

#[test]
fn unknown_fields_and_bad_flags_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("x.json"),
        r#"{"experiment":"constants","colour":1}"#,
    )
    .unwrap();
    let out = droplet(&["run", "--config", "x.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    let out = droplet(&["constants", "--kappa", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_uses_the_experiment_named_in_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"experiment":"renewal-asymptotics","beta_grid":[1000,10000,100000,1000000],"out":"r"}"#,
    )
    .unwrap();
    let out = droplet(&["run", "--config", "c.json"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/manifest.json")).unwrap())
            .unwrap();
    assert!(m["summary"]["relative_error"].as_f64().unwrap() < 0.02);
}
