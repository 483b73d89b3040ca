use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn gmc(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gmc"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "run.replicas=8\nfield.cells=32\nfield.t_max=3\n";

#[test]
fn unknown_key_exits_one_and_lists_accepted_keys() {
    let dir = workdir("unknown_key");
    let o = gmc(&dir, "field.cels=32\n", &["--out", dir.join("out").to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("field.cels"), "{err}");
    assert!(err.contains("field.cells"), "{err}");
}

#[test]
fn invalid_value_exits_one() {
    let dir = workdir("invalid_value");
    let o = gmc(&dir, "field.backend=fourier\n", &["--out", dir.join("out").to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn oversized_cholesky_exits_three_with_incomplete_manifest() {
    let dir = workdir("resource");
    let out = dir.join("out");
    let o = gmc(&dir, "field.cells=5000\nfield.backend=cholesky\n", &["--out", out.to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(manifest(&out)["complete"], false);
}

#[test]
fn empty_experiment_list_writes_manifest_without_outputs() {
    let dir = workdir("empty");
    let out = dir.join("out");
    let o = gmc(&dir, "experiments=\n", &["--out", out.to_str().unwrap(), "analyze"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["complete"], true);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 0);
}

#[test]
fn same_config_and_seed_give_identical_hashes() {
    let dir = workdir("determinism");
    let run = |name: &str, seed: &str, workers: &str| {
        let out = dir.join(name);
        let o = gmc(&dir, SMALL, &["--seed", seed, "--workers", workers, "--out", out.to_str().unwrap(), "measure"]);
        assert!(o.status.success(), "{}", stderr(&o));
        manifest(&out)["outputs"].clone()
    };
    let a = run("a", "5", "1");
    let b = run("b", "5", "0");
    let c = run("c", "6", "1");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let dir = workdir("replay");
    let out = dir.join("out");
    let o = gmc(&dir, SMALL, &["--out", out.to_str().unwrap(), "analyze", "martingale"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = out.join("manifest.json");
    let replay = |m: &Path| Command::new(env!("CARGO_BIN_EXE_gmc")).arg("replay").arg(m).output().unwrap();
    assert!(replay(&path).status.success());

    let mut m = manifest(&out);
    m["outputs"][0]["sha256"] = "00".repeat(32).into();
    let tampered = dir.join("tampered.json");
    std::fs::write(&tampered, m.to_string()).unwrap();
    assert_eq!(replay(&tampered).status.code(), Some(2));

    let mut m = manifest(&out);
    m["config"] = m["config"].as_str().unwrap().replace("run.replicas=8", "run.replicas=9").into();
    std::fs::write(&tampered, m.to_string()).unwrap();
    assert_eq!(replay(&tampered).status.code(), Some(2));
}

#[test]
fn subcritical_spectrum_beyond_moment_range_warns() {
    let dir = workdir("spectrum_warning");
    let out = dir.join("out");
    let config = "run.replicas=4\nfield.cells=64\nfield.t_max=3\nmeasure.kind=subcritical\nmeasure.gamma=3\nanalysis.q=0.1,2\n";
    let o = gmc(&dir, config, &["--out", out.to_str().unwrap(), "analyze", "spectrum"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let warnings = manifest(&out)["warnings"].to_string();
    assert!(warnings.contains("q = 2"), "{warnings}");
    assert!(!warnings.contains("q = 0.1"), "{warnings}");
}

#[test]
fn render_rejects_one_dimensional_input() {
    let dir = workdir("render_1d");
    let out = dir.join("m");
    let o = gmc(&dir, SMALL, &["--out", out.to_str().unwrap(), "measure"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = out.join("measures/replica_00000.csv");
    let o = gmc(&dir, SMALL, &["--out", dir.join("r").to_str().unwrap(), "render", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn keys_lists_every_section() {
    let o = Command::new(env!("CARGO_BIN_EXE_gmc")).arg("keys").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["run.seed", "field.backend", "measure.kind", "cascade.depth", "analysis.q", "render.scale"] {
        assert!(text.contains(key), "{key} missing");
    }
}

#[test]
fn unknown_experiment_exits_one() {
    let dir = workdir("unknown_experiment");
    let o = gmc(&dir, SMALL, &["--out", dir.join("out").to_str().unwrap(), "analyze", "no_such_test"]);
    assert_eq!(o.status.code(), Some(1));
}
