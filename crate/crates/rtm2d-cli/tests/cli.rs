//! End-to-end tests of the experiment harness: configuration handling,
//! artifact layout, reproducibility, exit codes, and the bundled configs.

use rtm2d_cli::{config::ExperimentConfig, experiment, Overrides};
use std::path::{Path, PathBuf};
use std::process::Command;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small_run_config(out: &Path, noise: bool) -> String {
    format!(
        r#"
output_dir = "{}"

[wave]
wavelengths = [1.0]

[aperture]
sources = 12
receivers = 12
source_radius = 60.0
receiver_radius = 60.0

[[body]]
shape = {{ kind = "circle", radius = 1.0, center = [0.0, 0.0] }}
boundary = {{ kind = "pec" }}

[grid]
xmin = -2.0
xmax = 2.0
ymin = -2.0
ymax = 2.0
nx = 11
ny = 11

[imaging]
polarizations = ["e1"]

[[cross_section]]
axis = "x1"
offset = 0.0
{}"#,
        out.display().to_string().replace('\\', "/"),
        if noise {
            "\n[noise]\nmu = 0.2\nseed = 9\n"
        } else {
            ""
        }
    )
}

#[test]
fn run_experiment_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = write_config(dir.path(), "run.cfg", &small_run_config(&out, false));
    let config = ExperimentConfig::from_path(&cfg_path).unwrap();
    let manifest = experiment::run_experiment(&config, &Overrides::default()).unwrap();

    assert!(out.join("dataset_00.bin").exists());
    assert!(out.join("dataset_00.json").exists());
    assert!(out.join("image_00.bin").exists());
    assert!(out.join("image_00.json").exists());
    assert!(out.join("image_00_profile_0_x1.csv").exists());
    assert!(out.join("manifest.json").exists());
    assert_eq!(manifest.artifacts.len(), 3);
    assert_eq!(manifest.config_digest, config.digest());

    // The artifacts round-trip through the io layer.
    let data = rtm2d_core::io::load_dataset(&out.join("dataset_00")).unwrap();
    assert_eq!(data.aperture.n_src, 12);
    let img = rtm2d_core::io::load_image(&out.join("image_00")).unwrap();
    assert_eq!(img.grid.nx, 11);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let cfg_path = write_config(
        dir.path(),
        "seeded.cfg",
        &small_run_config(&dir.path().join("ignored"), true),
    );
    let config = ExperimentConfig::from_path(&cfg_path).unwrap();
    for out in [&out_a, &out_b] {
        let overrides = Overrides {
            output_dir: Some(out.clone()),
            seed: None,
        };
        experiment::run_experiment(&config, &overrides).unwrap();
    }
    for name in ["dataset_00.bin", "image_00.bin"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seeded runs");
    }

    // A different seed changes the dataset.
    let out_c = dir.path().join("c");
    let overrides = Overrides {
        output_dir: Some(out_c.clone()),
        seed: Some(12345),
    };
    experiment::run_experiment(&config, &overrides).unwrap();
    let a = std::fs::read(out_a.join("dataset_00.bin")).unwrap();
    let c = std::fs::read(out_c.join("dataset_00.bin")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn empty_scene_produces_zero_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let text = small_run_config(&out, false);
    let text = text.replace(
        "[[body]]\nshape = { kind = \"circle\", radius = 1.0, center = [0.0, 0.0] }\nboundary = { kind = \"pec\" }\n",
        "",
    );
    let cfg_path = write_config(dir.path(), "empty.cfg", &text);

    let status = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["run"])
        .arg(&cfg_path)
        .status()
        .unwrap();
    assert!(status.success());

    let img = rtm2d_core::io::load_image(&out.join("image_00")).unwrap();
    assert!(img.values.iter().all(|&v| v == 0.0));
}

#[test]
fn invalid_config_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), "bad.cfg", "output_dir = 3\n");
    let status = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["run"])
        .arg(&cfg_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let missing = dir.path().join("does_not_exist.cfg");
    let status = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["run"])
        .arg(&missing)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

fn verify_config(out: &Path, extra_verify: &str) -> String {
    format!(
        r#"
output_dir = "{}"

[wave]
wavelengths = [1.0]

[aperture]
sources = 16
receivers = 16
source_radius = 100.0
receiver_radius = 100.0

[[body]]
shape = {{ kind = "circle", radius = 1.0, center = [0.0, 0.0] }}
boundary = {{ kind = "pec" }}

[grid]
xmin = -2.0
xmax = 2.0
ymin = -2.0
ymax = 2.0
nx = 11
ny = 11

[imaging]
polarizations = ["e1"]

[verify]
pairs = 5
{extra_verify}"#,
        out.display().to_string().replace('\\', "/"),
    )
}

#[test]
fn verify_suite_passes_and_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = write_config(dir.path(), "verify.cfg", &verify_config(&out, ""));
    let output = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["verify"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    // Requested checks: hk_exact, hk_farfield (scalar + dyadic), energy_flux,
    // reciprocity. The scene is PEC, so no consistency check.
    let reports = std::fs::read_to_string(out.join("reports.jsonl")).unwrap();
    assert_eq!(reports.lines().count(), 5);
    for line in reports.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true, "{line}");
    }
}

#[test]
fn verify_suite_zero_tolerance_fails_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = write_config(
        dir.path(),
        "verify0.cfg",
        &verify_config(&out, "exact_tolerance = 0.0\n"),
    );
    let status = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["verify"])
        .arg(&cfg_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    // Reports are still written for inspection.
    assert!(out.join("reports.jsonl").exists());
}

#[test]
fn info_describes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = write_config(dir.path(), "run.cfg", &small_run_config(&out, true));
    let config = ExperimentConfig::from_path(&cfg_path).unwrap();
    experiment::run_experiment(&config, &Overrides::default()).unwrap();

    for (arg, needle) in [
        (out.join("dataset_00.bin"), "scatter dataset"),
        (out.join("image_00.json"), "image grid"),
        (out.join("manifest.json"), "run manifest"),
    ] {
        let output = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
            .args(["info"])
            .arg(&arg)
            .output()
            .unwrap();
        assert!(output.status.success());
        let text = String::from_utf8_lossy(&output.stdout);
        assert!(text.contains(needle), "{arg:?}: {text}");
    }

    let status = Command::new(env!("CARGO_BIN_EXE_rtm2d"))
        .args(["info"])
        .arg(dir.path().join("nope.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn bundled_configs_parse_and_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(
        count >= 14,
        "expected the bundled config set, found {count}"
    );
}

#[test]
fn bundled_example_configs_match_stated_captions() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let ex1 = ExperimentConfig::from_path(&configs.join("example1_pec_circle.cfg")).unwrap();
    assert_eq!(ex1.wave.wavelengths, vec![0.25]);
    assert_eq!(ex1.aperture.sources, 256);
    assert_eq!(ex1.aperture.source_radius, 1000.0);
    assert_eq!((ex1.grid.nx, ex1.grid.ny), (201, 201));
    assert_eq!((ex1.grid.xmin, ex1.grid.xmax), (-2.0, 2.0));

    let ex4 = ExperimentConfig::from_path(&configs.join("example4_two_circles.cfg")).unwrap();
    assert_eq!(ex4.bodies.len(), 2);
    assert_eq!(ex4.wave.wavelengths, vec![1.0, 0.5, 0.25]);
    assert_eq!((ex4.grid.xmin, ex4.grid.xmax), (-6.0, 6.0));
}
