//! Script execution and the run report.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::bench::output::{encode_pgm, encode_trajectory_csv};
use crate::bench::script::{AnalysisSpec, BenchScript, ElementSpec};
use crate::elements::intermediate_states;
use crate::error::{ElementError, InterferenceError, StateError};
use crate::interferometry::{
    core_polarity, envelope_peak_radius, measure_visibility, render_states, Polarity,
    ReferenceTilt,
};
use crate::modes::{beam_width, BeamGeometry};
use crate::so3::{trace_trajectory, HomotopyClass, verify_phase_consistency, MAX_NONSEPARABILITY_DEFECT};
use crate::state::{prepare_initial, PreparationConfig, SpinOrbitState};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SAMPLES_PER_ELEMENT: usize = 256;
pub const DEFAULT_GRID: usize = 512;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("line {line}: {source}")]
    Element { line: usize, source: ElementError },
    #[error(transparent)]
    State(#[from] StateError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub samples_per_element: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("."), samples_per_element: DEFAULT_SAMPLES_PER_ELEMENT }
    }
}

/// A file produced by a run, path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

/// Amplitudes as `[re, im]` pairs.
pub type Amplitudes = [[f64; 2]; 4];

fn amplitudes(s: &SpinOrbitState) -> Amplitudes {
    s.amplitudes().map(|c| [c.re, c.im])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub line: usize,
    pub element: String,
    pub state: Amplitudes,
    pub concurrence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub line: usize,
    pub samples_per_element: usize,
    pub crossings: Vec<f64>,
    pub homotopy_class: String,
    pub topological_phase: i8,
    pub overlap_with_initial: [f64; 2],
    pub closed: bool,
    /// `None` when the path is not cyclic.
    pub phase_consistent: Option<bool>,
    pub csv: String,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferogramReport {
    pub line: usize,
    pub out: String,
    pub grid: usize,
    pub extent: f64,
    pub qx: f64,
    pub qy: f64,
    pub visibility: f64,
    pub polarity: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedAnalysis {
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnalysisResult<T> {
    Ok(T),
    Failed(FailedAnalysis),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub script: String,
    pub epsilon: f64,
    pub initial_state: Amplitudes,
    pub initial_concurrence: f64,
    pub stages: Vec<StageReport>,
    pub final_state: Amplitudes,
    pub trajectories: Vec<AnalysisResult<TrajectoryReport>>,
    pub interferograms: Vec<AnalysisResult<InterferogramReport>>,
    pub errors: Vec<String>,
}

impl RunReport {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&sort_keys(value)).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn is_success(&self) -> bool {
        self.errors.is_empty()
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

fn polarity_label(p: Result<Polarity, InterferenceError>) -> String {
    match p {
        Ok(Polarity::Bright) => "bright".into(),
        Ok(Polarity::Dark) => "dark".into(),
        Ok(Polarity::None) => "none".into(),
        Err(_) => "indeterminate".into(),
    }
}

fn class_label(c: HomotopyClass) -> &'static str {
    match c {
        HomotopyClass::Zero => "0",
        HomotopyClass::Pi => "pi",
    }
}

fn trajectory_csv_name(out: &Option<String>, index: usize) -> String {
    match out {
        Some(o) => o.clone(),
        None if index == 0 => "trajectory.csv".into(),
        None => format!("trajectory_{}.csv", index + 1),
    }
}

/// Runs the script without touching the file system. Element errors abort;
/// analysis errors are recorded in the report.
pub fn execute(script: &BenchScript, samples_per_element: usize) -> Result<RunOutcome, RunError> {
    let s0 = prepare_initial(&PreparationConfig::new(script.source.epsilon)?);
    let mut elems = Vec::with_capacity(script.elements.len());
    for d in &script.elements {
        elems.push(
            d.spec.to_element().map_err(|source| RunError::Element { line: d.span.line, source })?,
        );
    }
    let states = intermediate_states(&s0, &elems).map_err(|source| {
        let line = match source {
            ElementError::StateAnnihilated { index } => script.elements[index].span.line,
            _ => script.source.span.line,
        };
        RunError::Element { line, source }
    })?;
    let s_final = states[states.len() - 1];

    let stages = script
        .elements
        .iter()
        .zip(&states[1..])
        .map(|(d, s)| StageReport {
            line: d.span.line,
            element: d.spec.to_string(),
            state: amplitudes(s),
            concurrence: s.concurrence(),
        })
        .collect();

    let mut errors = Vec::new();
    let mut artifacts = Vec::new();
    let mut trajectories = Vec::new();
    let mut interferograms = Vec::new();
    let geom = BeamGeometry::default();
    let mut n_traj = 0;

    for a in &script.analyses {
        let line = a.span.line;
        match &a.spec {
            AnalysisSpec::Trajectory { samples, out } => {
                let csv = trajectory_csv_name(out, n_traj);
                n_traj += 1;
                let spe = samples.unwrap_or(samples_per_element);
                match trajectory(&s0, &states, script, &elems, spe) {
                    Ok(traj) => {
                        artifacts.push(Artifact {
                            path: PathBuf::from(&csv),
                            bytes: encode_trajectory_csv(&traj).into_bytes(),
                        });
                        let ov = traj.overlap_with_initial();
                        trajectories.push(AnalysisResult::Ok(TrajectoryReport {
                            line,
                            samples_per_element: spe,
                            crossings: traj.crossings.clone(),
                            homotopy_class: class_label(traj.homotopy_class).into(),
                            topological_phase: traj.topological_phase,
                            overlap_with_initial: [ov.re, ov.im],
                            closed: traj.is_closed(),
                            phase_consistent: verify_phase_consistency(&traj).ok(),
                            csv,
                            diagnostics: traj.diagnostics,
                        }));
                    }
                    Err(error) => {
                        errors.push(format!("line {line}: trajectory: {error}"));
                        trajectories.push(AnalysisResult::Failed(FailedAnalysis { line, error }));
                    }
                }
            }
            AnalysisSpec::Interfere { qx, qy, grid, extent, out } => {
                let default_tilt = ReferenceTilt::default_for(0.0, &geom);
                let tilt = ReferenceTilt::new(
                    qx.unwrap_or(default_tilt.qx),
                    qy.unwrap_or(default_tilt.qy),
                );
                let grid = grid.unwrap_or(DEFAULT_GRID);
                let extent = extent.unwrap_or(2.0 * beam_width(0.0, &geom));
                let result = render_states(&s0, &s_final, &tilt, 0.0, &geom, grid, extent)
                    .and_then(|img| {
                        Ok((measure_visibility(&img, envelope_peak_radius(0.0, &geom))?, img))
                    });
                match result {
                    Ok((visibility, img)) => {
                        artifacts.push(Artifact { path: PathBuf::from(out), bytes: encode_pgm(&img) });
                        let mut warnings = Vec::new();
                        let fringes = tilt.magnitude() * extent / std::f64::consts::PI;
                        if fringes < 2.0 {
                            warnings.push(format!(
                                "only {fringes:.2} fringes across the image; \
                                 visibility may be unreliable"
                            ));
                        }
                        interferograms.push(AnalysisResult::Ok(InterferogramReport {
                            line,
                            out: out.clone(),
                            grid,
                            extent,
                            qx: tilt.qx,
                            qy: tilt.qy,
                            visibility,
                            polarity: polarity_label(core_polarity(&s0, &s_final)),
                            warnings,
                        }));
                    }
                    Err(e) => {
                        let error = e.to_string();
                        errors.push(format!("line {line}: interfere: {error}"));
                        interferograms.push(AnalysisResult::Failed(FailedAnalysis { line, error }));
                    }
                }
            }
        }
    }

    let report = RunReport {
        tool_version: TOOL_VERSION.to_string(),
        script: script.to_string(),
        epsilon: script.source.epsilon,
        initial_state: amplitudes(&s0),
        initial_concurrence: s0.concurrence(),
        stages,
        final_state: amplitudes(&s_final),
        trajectories,
        interferograms,
        errors,
    };
    Ok(RunOutcome { report, artifacts })
}

fn trajectory(
    s0: &SpinOrbitState,
    states: &[SpinOrbitState],
    script: &BenchScript,
    elems: &[crate::elements::OpticalElement],
    spe: usize,
) -> Result<crate::so3::Trajectory, String> {
    for (i, s) in states.iter().enumerate() {
        let c = s.concurrence();
        if (c - 1.0).abs() > MAX_NONSEPARABILITY_DEFECT {
            let at = match i {
                0 => "at the source".to_string(),
                _ => {
                    let d = &script.elements[i - 1];
                    let kind = match d.spec {
                        ElementSpec::Pbs { .. } => " (pbs)",
                        _ => "",
                    };
                    format!("after line {}{kind}", d.span.line)
                }
            };
            return Err(format!(
                "trajectory requires maximal nonseparability (concurrence {c:.6} {at})"
            ));
        }
    }
    trace_trajectory(s0, elems, spe).map_err(|e| e.to_string())
}

/// Executes the script and writes its artifacts under `opts.out_dir`.
pub fn run(script: &BenchScript, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let outcome = execute(script, opts.samples_per_element)?;
    write_artifacts(&outcome.artifacts, &opts.out_dir)?;
    Ok(outcome)
}

pub fn write_artifacts(artifacts: &[Artifact], dir: &Path) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for a in artifacts {
        let path = dir.join(&a.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        std::fs::write(&path, &a.bytes).map_err(io(&path))?;
    }
    Ok(())
}
