//! End-to-end runs of the `cracktip` binary: artifacts, manifests,
//! determinism, comparison and failure modes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cracktip")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cracktip-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

const EXACT_HARMONIC: &str = r#"
scenario = "exact_harmonic"
k = 1
amplitude = 1.0

[mesh]
levels = 5
base_resolution = 32

[schedule]
radii_steps = 10
"#;

#[test]
fn exact_harmonic_frequency_run() {
    let dir = tmp_dir("harm");
    let cfg = write_config(&dir, "run.toml", EXACT_HARMONIC);
    let out = dir.join("out");
    let res = run(&["frequency", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    // N ≡ 0.5 along the whole trace
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        let n: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((n - 0.5).abs() < 1e-9, "N = {n}");
    }
    // manifest: all checks pass, every emitted file listed with a digest
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_manifest.json")).unwrap())
            .unwrap();
    for c in manifest["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], true, "check failed: {c}");
    }
    let listed: Vec<&str> =
        manifest["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    for name in ["mesh.txt", "field.txt", "trace.csv", "summary.json"] {
        assert!(listed.contains(&name), "{name} not listed in manifest");
    }
    // validate subcommand agrees
    let res = run(&["validate", "--run", out.to_str().unwrap()]);
    assert!(res.status.success());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_leaves_no_artifacts() {
    let dir = tmp_dir("badcfg");
    let cfg = write_config(&dir, "bad.toml", "scenario = \"exact_harmonic\"\nnonsense_key = 3\n");
    let out = dir.join("out");
    let res = run(&["frequency", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(!out.exists(), "output directory must not be created for malformed configs");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn identical_configs_give_bit_identical_tables() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "run.toml", EXACT_HARMONIC);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let res =
            run(&["frequency", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    }
    for name in ["trace.csv", "field.txt", "mesh.txt"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // compare reports zero diffs
    let res = run(&["compare", out_a.to_str().unwrap(), out_b.to_str().unwrap()]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("max relative difference: 0"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn refinement_decreases_trace_diff() {
    let dir = tmp_dir("refine");
    let cfg = write_config(
        &dir,
        "fem.toml",
        r#"
scenario = "fem_constant_potential"
k = 1

[mesh]
levels = 8
base_resolution = 16

[schedule]
radii_steps = 10
"#,
    );
    let coarse = dir.join("coarse");
    let mid = dir.join("mid");
    let fine = dir.join("fine");
    for (out, base) in [(&coarse, "16"), (&mid, "32"), (&fine, "64")] {
        let res = run(&[
            "frequency",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--base-resolution",
            base,
        ]);
        assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    }
    let d_coarse = max_diff(&run(&["compare", coarse.to_str().unwrap(), fine.to_str().unwrap()]));
    let d_mid = max_diff(&run(&["compare", mid.to_str().unwrap(), fine.to_str().unwrap()]));
    println!("coarse-vs-fine {d_coarse}, mid-vs-fine {d_mid}");
    assert!(d_mid < d_coarse, "trace diff must shrink under refinement");
    let _ = std::fs::remove_dir_all(&dir);
}

fn max_diff(out: &Output) -> f64 {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix("max relative difference: "))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn compare_rejects_scenario_mismatch() {
    let dir = tmp_dir("mismatch");
    let cfg_a = write_config(&dir, "a.toml", EXACT_HARMONIC);
    let cfg_b = write_config(
        &dir,
        "b.toml",
        "scenario = \"exact_bessel\"\nk = 1\n[mesh]\nlevels = 5\nbase_resolution = 32\n[schedule]\nradii_steps = 10\n",
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    assert!(run(&["frequency", "--config", cfg_a.to_str().unwrap(), "--output", out_a.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["frequency", "--config", cfg_b.to_str().unwrap(), "--output", out_b.to_str().unwrap()])
        .status
        .success());
    let res = run(&["compare", out_a.to_str().unwrap(), out_b.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("scenario mismatch"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tampered_artifacts_fail_validation() {
    let dir = tmp_dir("tamper");
    let cfg = write_config(&dir, "run.toml", EXACT_HARMONIC);
    let out = dir.join("out");
    assert!(run(&["solve", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()])
        .status
        .success());
    // flip one byte of the field table
    let path = out.join("field.txt");
    let mut content = std::fs::read_to_string(&path).unwrap();
    content.push_str("tampered\n");
    std::fs::write(&path, content).unwrap();
    let res = run(&["validate", "--run", out.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("digest"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exact_bessel_blowup_run() {
    let dir = tmp_dir("blowup");
    let cfg = write_config(
        &dir,
        "run.toml",
        r#"
scenario = "exact_bessel"
k = 1
amplitude = 1.0

[potential]
c = 1.0

[mesh]
levels = 5
base_resolution = 32

[schedule]
radii_steps = 10
lambda_max = 0.5
lambda_count = 6
"#,
    );
    let out = dir.join("out");
    let res = run(&["blowup", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let alpha = summary["alpha"][0].as_f64().unwrap();
    assert!((alpha - 2.0f64.sqrt()).abs() < 0.03, "α = {alpha}");
    assert!(summary["decay_slope"].as_f64().unwrap() >= 1.8);
    assert_eq!(summary["all_checks_pass"], true);
    assert!(out.join("blowup_report.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sphere_spectrum_run() {
    let dir = tmp_dir("sphere");
    let cfg = write_config(
        &dir,
        "run.toml",
        "scenario = \"sphere_spectrum\"\n[mesh]\nresolution = 16\n[schedule]\neigenpairs = 7\n",
    );
    let out = dir.join("out");
    let res = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    let mus: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mus.len(), 7);
    assert!(mus[0].abs() < 1e-8);
    assert!((mus[1] - 0.75).abs() / 0.75 < 0.05, "μ₁ = {}", mus[1]);
    assert!(out.join("eigvec_000.txt").exists());
    assert!(out.join("nonvanishing.csv").exists());
    assert!(out.join("clusters.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_config_subcommand() {
    let dir = tmp_dir("valcfg");
    let good = write_config(&dir, "good.toml", EXACT_HARMONIC);
    assert!(run(&["validate", "--config", good.to_str().unwrap()]).status.success());
    let bad = write_config(&dir, "bad.toml", "scenario = \"exact_harmonic\"\n[potential]\nepsilon = 7\n");
    assert!(!run(&["validate", "--config", bad.to_str().unwrap()]).status.success());
    let _ = std::fs::remove_dir_all(&dir);
}
