use std::path::PathBuf;

use sha2::{Digest, Sha256};
use vvbench_core::bench::run::{AnalysisResult, RunOptions};
use vvbench_core::bench::{encode_pgm, execute, parse, run};
use vvbench_core::interferometry::{render, InterferenceConfig};

fn bench_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bench")
}

fn load(name: &str) -> vvbench_core::bench::BenchScript {
    let text = std::fs::read_to_string(bench_dir().join(name)).unwrap();
    parse(&text).unwrap()
}

#[test]
fn pi_class_script() {
    let out = execute(&load("pi_class.bench"), 256).unwrap();
    let r = &out.report;
    assert!(r.is_success(), "{:?}", r.errors);
    let AnalysisResult::Ok(t) = &r.trajectories[0] else { panic!() };
    assert_eq!((t.crossings.len(), t.homotopy_class.as_str(), t.topological_phase), (1, "pi", -1));
    let AnalysisResult::Ok(i) = &r.interferograms[0] else { panic!() };
    assert_eq!(i.polarity, "dark");
    assert!((i.visibility - 1.0).abs() < 1e-3);
}

#[test]
fn zero_class_script() {
    let out = execute(&load("zero_class.bench"), 256).unwrap();
    let r = &out.report;
    let AnalysisResult::Ok(t) = &r.trajectories[0] else { panic!() };
    assert_eq!((t.crossings.len(), t.homotopy_class.as_str(), t.topological_phase), (0, "0", 1));
    let AnalysisResult::Ok(i) = &r.interferograms[0] else { panic!() };
    assert_eq!(i.polarity, "bright");
}

#[test]
fn separable_script_has_no_fringes() {
    let out = execute(&load("separable.bench"), 256).unwrap();
    let AnalysisResult::Ok(i) = &out.report.interferograms[0] else { panic!() };
    assert_eq!(i.polarity, "none");
    assert!(i.visibility < 1e-3);
}

#[test]
fn script_image_matches_panel_render() {
    // The interfere directive with defaults reproduces the default panel.
    let out = execute(&load("pi_class.bench"), 16).unwrap();
    let pgm = out.artifacts.iter().find(|a| a.path.ends_with("pi_class.pgm")).unwrap();
    let panel = render(&InterferenceConfig::panel(0.5, 45.0)).unwrap();
    assert_eq!(pgm.bytes, encode_pgm(&panel));
}

#[test]
fn golden_panel_digest() {
    let img = render(&InterferenceConfig::panel(0.5, 45.0)).unwrap();
    let digest = hex::encode(Sha256::digest(encode_pgm(&img)));
    assert_eq!(digest, GOLDEN_PI_PANEL);
}

// SHA-256 of the 512×512 PGM for ε = 1/2, θ = +45°.
const GOLDEN_PI_PANEL: &str = "3c1afa0e668d40e1e787037fe173cc8b8c92f9a0b088e47ec6771f77429bdd51";

#[test]
fn run_writes_report_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out_dir: dir.path().to_path_buf(), samples_per_element: 32 };
    let out = run(&load("zero_class.bench"), &opts).unwrap();
    for a in &out.artifacts {
        assert_eq!(std::fs::read(dir.path().join(&a.path)).unwrap(), a.bytes);
    }
    let csv = std::fs::read_to_string(dir.path().join("zero_class.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4 * 32 + 2);
}

#[test]
fn filter_before_trajectory_is_reported() {
    let script = parse("source epsilon=0.5\npbs keep=H\ntrajectory\n").unwrap();
    let out = execute(&script, 64).unwrap();
    assert!(!out.report.is_success());
    assert!(out.report.errors[0].contains("trajectory requires maximal nonseparability"));
    let json = out.report.to_json();
    assert!(json.contains("\"error\""));
}
