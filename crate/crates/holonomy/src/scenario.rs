//! Declarative scenario runner: a JSON config selects a frame, a path, a
//! grid, and tolerances; the runner executes the frame-to-gate pipeline,
//! verifies every condition, and emits machine-readable reports.
//!
//! Everything here is pinned to `f64`, where the default tolerances live.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{self, EngineError, EvolutionRecord, PulseChannels, TimeGrid};
use crate::frames::{
    AuxiliaryFrame, FrameError, FrameParams, OneQubitFrame, TabulatedFrame, TwoQubitFrame,
};
use crate::gates::{self, GateSpec, PulseProfile};
use crate::numkit::{gate_distance, ComplexMatrix, MatrixError};
use crate::spherepaths::{
    minimal_circle_at, orange_slice, three_arc, PathError, Schedule, SpherePath,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Tolerances the run is judged against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub gate: f64,
    pub residual: f64,
    pub unitarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gate: 1e-6,
            residual: 1e-8,
            unitarity: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    OneQubit,
    TwoQubit,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFamily {
    OrangeSlice,
    ThreeArc,
    MinimalCircle,
}

/// Path descriptor: either a built-in family with its angle parameter or an
/// explicit segment list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    Builtin {
        builtin: PathFamily,
        angle: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        azimuth: f64,
    },
    Explicit(SpherePath<f64>),
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl PathSpec {
    pub fn resolve(&self) -> Result<SpherePath<f64>, ScenarioError> {
        match self {
            PathSpec::Builtin {
                builtin,
                angle,
                azimuth,
            } => {
                let path = match builtin {
                    PathFamily::OrangeSlice => orange_slice(*angle)?,
                    PathFamily::ThreeArc => three_arc(*angle)?,
                    PathFamily::MinimalCircle => minimal_circle_at(*angle, *azimuth)?,
                };
                Ok(path)
            }
            PathSpec::Explicit(path) => Ok(path.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Report,
    Pulses,
    Trace,
    Evolution,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Report, OutputKind::Pulses, OutputKind::Trace]
}

fn default_steps() -> usize {
    4096
}

/// Declarative run description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub frame_kind: FrameKind,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub varphi: f64,
    pub path: PathSpec,
    /// Optional monotone re-timing applied to the path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule<f64>>,
    #[serde(default = "default_steps")]
    pub grid_steps: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// Frame table file for `frame_kind = custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_frame: Option<PathBuf>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.grid_steps < 16 {
            return Err(ScenarioError::Config(format!(
                "grid_steps must be at least 16, got {}",
                self.grid_steps
            )));
        }
        let t = &self.tolerances;
        if !(t.gate > 0.0 && t.residual > 0.0 && t.unitarity > 0.0) {
            return Err(ScenarioError::Config("tolerances must be positive".into()));
        }
        if self.frame_kind == FrameKind::Custom && self.custom_frame.is_none() {
            return Err(ScenarioError::Config(
                "frame_kind = custom requires a custom_frame file".into(),
            ));
        }
        Ok(())
    }
}

/// Residuals of the verified conditions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    pub cyclic: f64,
    pub parallel_transport: f64,
    pub unitarity: f64,
}

/// Per-check outcomes against the scenario tolerances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PassFlags {
    pub gate: bool,
    pub cyclic: bool,
    pub parallel_transport: bool,
    pub unitarity: bool,
    pub all: bool,
}

/// Everything a run reports. `wall_time` is informational and excluded from
/// serialization so identical configs produce bit-identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    /// Holonomic gate in canonical computational coordinates.
    pub gate_matrix: ComplexMatrix<f64>,
    /// Phase-insensitive distance to the closed-form target (for built-in
    /// frames) or to the independently propagated gate (for custom frames).
    pub target_distance: f64,
    pub path_length: f64,
    pub enclosed_angle: f64,
    pub residuals: ResidualReport,
    /// Constant-speed traversal time relative to the length-`2 pi`
    /// meridian-pair protocol.
    pub time_ratio_vs_orange_slice: f64,
    pub passed: PassFlags,
    #[serde(skip)]
    pub wall_time: f64,
}

/// A completed run: the report plus the artifacts the writers need.
pub struct RunOutput {
    pub scenario: Scenario,
    pub report: RunReport,
    pub record: EvolutionRecord<f64>,
    pub path: SpherePath<f64>,
    pub pulses: Option<PulseProfile<f64>>,
    pub gamma_dot: Vec<f64>,
}

/// Executes the frame -> Hamiltonian -> propagation -> verification ->
/// comparison pipeline for one scenario.
pub fn run(scenario: &Scenario) -> Result<RunOutput, ScenarioError> {
    scenario.validate()?;
    let started = Instant::now();
    let mut path = scenario.path.resolve()?;
    if let Some(schedule) = &scenario.schedule {
        path = path.reparametrize(schedule.clone())?;
    }
    let grid = TimeGrid::new(scenario.grid_steps, path.total_duration())?;

    let frame: Box<dyn AuxiliaryFrame<f64>> = match scenario.frame_kind {
        FrameKind::OneQubit => Box::new(OneQubitFrame::new(FrameParams {
            theta: scenario.theta,
            varphi: scenario.varphi,
            path: path.clone(),
        })?),
        FrameKind::TwoQubit => Box::new(TwoQubitFrame::new(FrameParams {
            theta: scenario.theta,
            varphi: scenario.varphi,
            path: path.clone(),
        })?),
        FrameKind::Custom => {
            let file = scenario
                .custom_frame
                .as_ref()
                .expect("validated custom_frame");
            Box::new(TabulatedFrame::from_json(&fs::read_to_string(file)?)?)
        }
    };

    let record = engine::propagate(frame.as_ref(), &grid)?;
    let gate = engine::gate_from_record(&record, frame.as_ref())?;
    let canonical = engine::to_computational_basis(frame.as_ref(), &gate)?;

    let enclosed_angle = path.enclosed_angle()?;
    let path_length = path.length();

    let target_distance = match scenario.frame_kind {
        FrameKind::OneQubit => {
            let spec = GateSpec::new(scenario.theta, scenario.varphi, enclosed_angle);
            gate_distance(&canonical, &gates::analytic_one_qubit(&spec))?
        }
        FrameKind::TwoQubit => {
            let spec = GateSpec::new(scenario.theta, scenario.varphi, enclosed_angle);
            gate_distance(&canonical, &gates::analytic_two_qubit(&spec))?
        }
        // No closed form for user tables: report the agreement of the two
        // independent gate constructions instead.
        FrameKind::Custom => {
            gate_distance(&engine::propagated_block(&record, frame.as_ref()), &gate)?
        }
    };

    let residuals = ResidualReport {
        cyclic: engine::check_cyclic(&record, frame.as_ref()),
        parallel_transport: engine::check_parallel_transport(&record, frame.as_ref())?,
        unitarity: record.max_unitarity_defect(),
    };
    let tolerances = scenario.tolerances;
    let passed = PassFlags {
        gate: target_distance <= tolerances.gate,
        cyclic: residuals.cyclic <= tolerances.residual,
        parallel_transport: residuals.parallel_transport <= tolerances.residual,
        unitarity: residuals.unitarity <= tolerances.unitarity,
        all: target_distance <= tolerances.gate
            && residuals.cyclic <= tolerances.residual
            && residuals.parallel_transport <= tolerances.residual
            && residuals.unitarity <= tolerances.unitarity,
    };

    let pulses = match scenario.frame_kind {
        FrameKind::OneQubit | FrameKind::TwoQubit => Some(gates::pulse_profile(
            &FrameParams {
                theta: scenario.theta,
                varphi: scenario.varphi,
                path: path.clone(),
            },
            &grid,
        )),
        FrameKind::Custom => None,
    };
    let gamma_dot = (0..=grid.steps())
        .map(|m| frame.gamma_dot(grid.node(m)))
        .collect();

    let report = RunReport {
        gate_matrix: canonical,
        target_distance,
        path_length,
        enclosed_angle,
        residuals,
        time_ratio_vs_orange_slice: path_length / (2.0 * std::f64::consts::PI),
        passed,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        scenario: scenario.clone(),
        report,
        record,
        path,
        pulses,
        gamma_dot,
    })
}

impl RunOutput {
    /// Writes the requested artifacts into `dir`; returns the created paths.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for output in &self.scenario.outputs {
            match output {
                OutputKind::Report => {
                    let file = dir.join("report.json");
                    fs::write(&file, serde_json::to_string_pretty(&self.report)?)?;
                    written.push(file);
                }
                OutputKind::Pulses => {
                    if let Some(pulses) = &self.pulses {
                        let file = dir.join("pulses.csv");
                        let mut buffer = Vec::new();
                        pulses.write_csv(&mut buffer)?;
                        fs::write(&file, buffer)?;
                        written.push(file);
                    }
                }
                OutputKind::Trace => {
                    let file = dir.join("trace_alpha_beta.csv");
                    let mut buffer = Vec::new();
                    writeln!(&mut buffer, "t,alpha,beta")?;
                    for (t, alpha, beta) in self.path.trace(self.scenario.grid_steps) {
                        writeln!(&mut buffer, "{t},{alpha},{beta}")?;
                    }
                    fs::write(&file, buffer)?;
                    written.push(file);
                }
                OutputKind::Evolution => {
                    let file = dir.join("evolution.csv");
                    let mut buffer = Vec::new();
                    let channels = self.pulses.as_ref().map(|p| PulseChannels {
                        omega0: p.omega0.clone(),
                        omega1: p.omega1.clone(),
                        delta: p.delta.clone(),
                        gamma_dot: self.gamma_dot.clone(),
                    });
                    engine::write_record_csv(&mut buffer, &self.record, channels.as_ref())?;
                    fs::write(&file, buffer)?;
                    written.push(file);
                }
            }
        }
        Ok(written)
    }
}

/// Which scenario field a sweep range varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// The built-in path's angle parameter.
    Angle,
    Theta,
    Varphi,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Angle => "angle",
            SweepParameter::Theta => "theta",
            SweepParameter::Varphi => "varphi",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRange {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// One sweep point: the applied overrides plus the report or the failure.
#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub parameters: BTreeMap<&'static str, f64>,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

fn apply_overrides(
    template: &Scenario,
    overrides: &BTreeMap<&'static str, f64>,
) -> Result<Scenario, ScenarioError> {
    let mut scenario = template.clone();
    for (&name, &value) in overrides {
        match name {
            "theta" => scenario.theta = value,
            "varphi" => scenario.varphi = value,
            "angle" => match &mut scenario.path {
                PathSpec::Builtin { angle, .. } => *angle = value,
                PathSpec::Explicit(_) => {
                    return Err(ScenarioError::Config(
                        "angle sweeps need a builtin path descriptor".into(),
                    ))
                }
            },
            other => {
                return Err(ScenarioError::Config(format!(
                    "unknown sweep parameter {other}"
                )))
            }
        }
    }
    Ok(scenario)
}

/// Runs the template across the cartesian product of the ranges. Points
/// execute in parallel; the output order follows the range order, and
/// per-point failures are recorded without stopping the sweep.
pub fn sweep(template: &Scenario, ranges: &[SweepRange]) -> Vec<SweepPoint> {
    let mut combos: Vec<BTreeMap<&'static str, f64>> = vec![BTreeMap::new()];
    for range in ranges {
        let mut next = Vec::with_capacity(combos.len() * range.values.len());
        for combo in &combos {
            for &value in &range.values {
                let mut extended = combo.clone();
                extended.insert(range.parameter.name(), value);
                next.push(extended);
            }
        }
        combos = next;
    }

    combos
        .into_par_iter()
        .map(|overrides| {
            let outcome = apply_overrides(template, &overrides).and_then(|s| run(&s));
            match outcome {
                Ok(output) => SweepPoint {
                    parameters: overrides,
                    report: Some(output.report),
                    error: None,
                },
                Err(error) => SweepPoint {
                    parameters: overrides,
                    report: None,
                    error: Some(error.to_string()),
                },
            }
        })
        .collect()
}

/// Summary CSV over sweep points: requested parameters, measured geometry,
/// and the verification outcomes.
pub fn write_summary_csv<W: Write>(writer: &mut W, points: &[SweepPoint]) -> std::io::Result<()> {
    writeln!(
        writer,
        "index,angle,theta,varphi,phi,length,time_ratio,target_distance,cyclic,parallel_transport,unitarity,passed,error"
    )?;
    for (index, point) in points.iter().enumerate() {
        let get = |name: &str| {
            point
                .parameters
                .get(name)
                .map(|v| v.to_string())
                .unwrap_or_default()
        };
        match &point.report {
            Some(report) => writeln!(
                writer,
                "{index},{},{},{},{},{},{},{},{},{},{},{},",
                get("angle"),
                get("theta"),
                get("varphi"),
                report.enclosed_angle,
                report.path_length,
                report.time_ratio_vs_orange_slice,
                report.target_distance,
                report.residuals.cyclic,
                report.residuals.parallel_transport,
                report.residuals.unitarity,
                report.passed.all,
            )?,
            None => writeln!(
                writer,
                "{index},{},{},{},,,,,,,,false,{}",
                get("angle"),
                get("theta"),
                get("varphi"),
                point.error.as_deref().unwrap_or("unknown"),
            )?,
        }
    }
    Ok(())
}
