//! Exercises the `doa` binary: exit codes, artifacts, and client/server
//! operation against a separately spawned service.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Stdio};

use doa_core::synth::{DetectorNoise, DistractorSpec, SceneSpec, Shape, TargetSpec};

fn doa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doa"))
}

fn scene_spec(seed: u64) -> SceneSpec {
    SceneSpec {
        width: 128,
        height: 96,
        n_frames: 5,
        seed,
        target: TargetSpec {
            shape: Shape::Rect,
            x: 6,
            y: 8,
            w: 30,
            h: 24,
            vx: 4,
            vy: 0,
            texture_seed: seed,
            category: 1,
        },
        distractors: vec![DistractorSpec {
            shape: Shape::Rect,
            x: 70,
            y: 58,
            w: 44,
            h: 32,
            is_static: true,
            vx: 0,
            vy: 0,
            category: 9,
            similar_appearance: false,
        }],
        noise: DetectorNoise {
            boundary_jitter_px: 1,
            score_min: 0.85,
            score_max: 0.99,
            false_positive_rate: 0.0,
        },
    }
}

fn write_scene(dir: &Path, seed: u64) -> std::path::PathBuf {
    let spec_path = dir.join("scene.json");
    fs::write(
        &spec_path,
        serde_json::to_string_pretty(&scene_spec(seed)).unwrap(),
    )
    .unwrap();
    spec_path
}

fn empty_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, "").unwrap();
    path
}

#[test]
fn synth_and_run_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_scene(dir.path(), 61);
    let config = empty_config(dir.path());
    let scene = dir.path().join("scene");
    let out = dir.path().join("out");

    let status = doa()
        .args(["synth", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&scene)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(scene.join("manifest.json").is_file());

    let output = doa()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--sequence")
        .arg(&scene)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("plan records"));
    assert!(out.join("plan.json").is_file());
    assert!(out.join("pseudo_gt.pgm").is_file());
}

#[test]
fn missing_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = empty_config(dir.path());
    let output = doa()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--sequence")
        .arg(dir.path().join("nowhere"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("frames"), "{stderr}");
}

#[test]
fn no_foreground_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = scene_spec(62);
    spec.target.vx = 0; // static scene: empty motion mask
    let scene = dir.path().join("scene");
    doa_core::synth::generate(&spec, &scene).unwrap();
    let config = empty_config(dir.path());

    let output = doa()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--sequence")
        .arg(&scene)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("frame 0"));
}

#[test]
fn dimension_mismatch_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    doa_core::synth::generate(&scene_spec(63), &scene).unwrap();
    // Predictions at the wrong resolution.
    fs::create_dir_all(scene.join("predictions")).unwrap();
    let small = doa_core::BinaryMask::new(16, 16);
    for t in 0..5 {
        doa_core::pnm::write_mask(
            &scene.join(format!("predictions/{t:05}.pgm")),
            &small,
        )
        .unwrap();
    }
    let config = empty_config(dir.path());
    let output = doa()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--sequence")
        .arg(&scene)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{output:?}");
}

#[test]
fn bad_config_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    doa_core::synth::generate(&scene_spec(64), &scene).unwrap();
    let config = dir.path().join("config.toml");
    fs::write(&config, "t1 = 1.5\n").unwrap();
    let output = doa()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--sequence")
        .arg(&scene)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn eval_subcommand_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    doa_core::synth::generate(&scene_spec(65), &scene).unwrap();
    let metrics = dir.path().join("metrics.json");
    let output = doa()
        .args(["eval", "--pred"])
        .arg(scene.join("gt"))
        .arg("--gt")
        .arg(scene.join("gt"))
        .arg("--out")
        .arg(&metrics)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(parsed["j_mean"], 1.0);
}

#[test]
fn commands_reach_an_external_server() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_scene(dir.path(), 66);

    let mut server = doa()
        .args(["serve", "--addr", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let stdout = server.stdout.take().unwrap();
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).unwrap();
    let url = line
        .trim()
        .rsplit(' ')
        .next()
        .expect("listen line carries the url")
        .to_string();
    assert!(url.starts_with("http://127.0.0.1:"), "{line}");

    let scene = dir.path().join("scene");
    let status = doa()
        .args(["synth", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&scene)
        .args(["--server", &url])
        .status()
        .unwrap();
    server.kill().unwrap();
    server.wait().unwrap();
    assert!(status.success());
    assert!(scene.join("manifest.json").is_file());
}
