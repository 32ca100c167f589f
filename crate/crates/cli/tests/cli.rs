use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("semiflow-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, command: &str, config: &str) -> (i32, String) {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_semiflow"))
        .arg(command)
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn data(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join("out").join(name)).unwrap();
    serde_json::from_str::<Value>(&text).unwrap()["data"].clone()
}

#[test]
fn verify_doubling() {
    let dir = scratch("verify");
    let (code, err) = run(&dir, "verify", "map = \"doubling\"\nroof = \"constant(1)\"\n");
    assert_eq!(code, 0, "{err}");
    let report = data(&dir, "verify.json");
    let lambda = report["constants"]["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::LN_2).abs() < 1e-12);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["artifacts"][0]["name"], "verify.json");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn artifacts_carry_the_config_hash() {
    let dir = scratch("hash");
    let (code, err) = run(&dir, "density", "map = \"tripling\"\nroof = \"constant(1)\"\nfield_res = 65\n");
    assert_eq!(code, 0, "{err}");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    let csv = std::fs::read_to_string(dir.join("out/density.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), format!("# config_hash={hash}"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("out/density.json")).unwrap()).unwrap();
    assert_eq!(json["config_hash"], hash);
}

#[test]
fn identity_roof_is_cohomologous_to_a_two_valued_constant() {
    let dir = scratch("cohomology");
    let (code, err) = run(&dir, "cohomology", "map = \"doubling\"\nroof = \"affine(0, 1)\"\n");
    assert_eq!(code, 0, "{err}");
    let v = data(&dir, "cohomology.json");
    assert_eq!(v["verdict"], "cohomologous");
    assert_eq!(v["chi_all_equal"], false);
    let chi: Vec<f64> = v["chi"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
    assert!((chi[0] - chi[1]).abs() > 0.1, "chi {chi:?}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = scratch("config");
    let (code, err) = run(&dir, "verify", "mapp = \"doubling\"\n");
    assert_eq!(code, 2);
    assert!(err.contains("mapp"), "{err}");
    let (code, err) = run(&dir, "verify", "map = \"doubling\"\nsigma = -1.0\n");
    assert_eq!(code, 2);
    assert!(err.contains("sigma"), "{err}");
    let (code, _) = run(&dir, "verify", "map = \"baker\"\n");
    assert_eq!(code, 2);
}

#[test]
fn exceeded_word_budget_exits_with_four() {
    let dir = scratch("budget");
    let (code, err) = run(
        &dir,
        "transversality",
        "map = \"doubling\"\nroof = \"constant(1)\"\nword_budget = 16\nfield_res = 65\n",
    );
    assert_eq!(code, 4, "{err}");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap()).unwrap();
    assert!(manifest["status"].as_str().unwrap().starts_with("failed"));
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = scratch("io");
    let blocker = dir.join("out");
    std::fs::write(&blocker, "not a directory").unwrap();
    let (code, _) = run(&dir, "verify", "map = \"doubling\"\n");
    assert_eq!(code, 1);
}
