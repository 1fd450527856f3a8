//! Strict JSON run configuration: schema, defaults, range checks, and
//! construction of the domain objects.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::model::{Nonlinearity, NonlinearityKind, Potential, RadialProfile};
use crate::transform::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    VerifyTransform,
    CheckHypotheses,
    SolveRadial,
    SweepFamily,
    Sandwich,
    BallSolve,
    FullPipeline,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::VerifyTransform => "verify_transform",
            TaskKind::CheckHypotheses => "check_hypotheses",
            TaskKind::SolveRadial => "solve_radial",
            TaskKind::SweepFamily => "sweep_family",
            TaskKind::Sandwich => "sandwich",
            TaskKind::BallSolve => "ball_solve",
            TaskKind::FullPipeline => "full_pipeline",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    task: TaskKind,
    params: RawParams,
    nonlinearity: RawNonlinearity,
    potential: RawPotential,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    radial: RawRadial,
    #[serde(default)]
    ball: RawBall,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    p: f64,
    gamma: f64,
    dim: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    kind: String,
    #[serde(default)]
    coeff: Option<f64>,
    #[serde(default)]
    exponent: Option<f64>,
    #[serde(default)]
    log_exponent: Option<f64>,
    #[serde(default)]
    csv: Option<String>,
    #[serde(default)]
    delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    family: String,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    coeff: Option<f64>,
    #[serde(default)]
    exponent: Option<f64>,
    #[serde(default)]
    csv: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    kind: String,
    #[serde(default)]
    profile: Option<RawProfile>,
    #[serde(default)]
    base: Option<RawProfile>,
    #[serde(default)]
    modulation: Option<RawProfile>,
    #[serde(default)]
    mode: Option<u32>,
    #[serde(default)]
    phase: Option<f64>,
    #[serde(default)]
    angular_samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTolerances {
    tol: f64,
    transform_accuracy: f64,
}

impl Default for RawTolerances {
    fn default() -> Self {
        RawTolerances { tol: 1e-8, transform_accuracy: 1e-10 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRadial {
    r_max: f64,
    nodes: usize,
    grading: f64,
    max_iter: usize,
    overflow_guard: f64,
    alphas: Vec<f64>,
    epsilon: Option<f64>,
}

impl Default for RawRadial {
    fn default() -> Self {
        RawRadial {
            r_max: 100.0,
            nodes: 4096,
            grading: 2.0,
            max_iter: 200,
            overflow_guard: 1e12,
            alphas: vec![],
            epsilon: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBall {
    mesh_h: f64,
    radii: Vec<u32>,
    probe_points: Vec<(f64, f64)>,
    limit_tol: f64,
}

impl Default for RawBall {
    fn default() -> Self {
        RawBall { mesh_h: 0.1, radii: vec![5, 10, 20], probe_points: vec![], limit_tol: 1e-3 }
    }
}

/// Fully validated run configuration with constructed domain objects.
pub struct RunConfig {
    pub task: TaskKind,
    pub params: ProblemParams<f64>,
    pub nonlinearity: Nonlinearity<f64>,
    pub potential: Potential<f64>,
    pub delta: Option<f64>,
    pub tol: f64,
    pub transform_accuracy: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub grading: f64,
    pub max_iter: usize,
    pub overflow_guard: f64,
    pub alphas: Vec<f64>,
    pub epsilon: Option<f64>,
    pub mesh_h: f64,
    pub ball_radii: Vec<u32>,
    pub probe_points: Vec<(f64, f64)>,
    pub limit_tol: f64,
    /// Raw JSON as parsed, echoed into the report.
    pub echo: serde_json::Value,
}

fn read_csv_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read csv {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            let s = s
                .ok_or_else(|| Error::Config(format!("{}:{}: two columns required", path.display(), lineno + 1)))?
                .trim();
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("{}:{}: not a number: {s}", path.display(), lineno + 1)))
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        if lineno == 0 && (x.is_nan() || y.is_nan()) {
            continue; // tolerate a header line
        }
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

fn build_profile(raw: &RawProfile, base_dir: &Path, path: &str) -> Result<RadialProfile<f64>> {
    match raw.family.as_str() {
        "constant" => {
            let v = raw
                .value
                .ok_or_else(|| Error::Config(format!("{path}.value: required for constant family")))?;
            if v < 0.0 {
                return Err(Error::Config(format!("{path}.value: must be ≥ 0 (got {v})")));
            }
            Ok(RadialProfile::Constant(v))
        }
        "decay" => {
            let coeff = raw
                .coeff
                .ok_or_else(|| Error::Config(format!("{path}.coeff: required for decay family")))?;
            let exponent = raw
                .exponent
                .ok_or_else(|| Error::Config(format!("{path}.exponent: required for decay family")))?;
            if coeff < 0.0 {
                return Err(Error::Config(format!("{path}.coeff: must be ≥ 0 (got {coeff})")));
            }
            Ok(RadialProfile::Decay { coeff, exponent })
        }
        "tabulated" => {
            let csv = raw
                .csv
                .as_ref()
                .ok_or_else(|| Error::Config(format!("{path}.csv: required for tabulated family")))?;
            let (xs, ys) = read_csv_table(&base_dir.join(csv))?;
            let table = MonotoneCubic::new(xs, ys)
                .map_err(|e| Error::Config(format!("{path}.csv: {e}")))?;
            Ok(RadialProfile::Tabulated(table))
        }
        other => Err(Error::Config(format!(
            "{path}.family: unknown family '{other}' (expected constant | decay | tabulated)"
        ))),
    }
}

/// Parses, defaults, and range-checks a raw JSON config. Unknown keys are
/// rejected with their exact paths; `base_dir` anchors CSV references.
pub fn validate_config(raw_json: &str, base_dir: &Path) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(raw_json);
    let raw: RawConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
    let echo: serde_json::Value =
        serde_json::from_str(raw_json).map_err(|e| Error::Json(e.to_string()))?;

    if raw.schema_version != 1 {
        return Err(Error::Config(format!(
            "schema_version: only version 1 is supported (got {})",
            raw.schema_version
        )));
    }
    if !(raw.params.p > 1.0) {
        return Err(Error::Config(format!("params.p: p > 1 required (got {})", raw.params.p)));
    }
    if !(raw.params.gamma > 0.5) {
        return Err(Error::Config(format!(
            "params.gamma: γ > 1/2 required (got {})",
            raw.params.gamma
        )));
    }
    if raw.params.dim < 1 {
        return Err(Error::Config("params.dim: N ≥ 1 required".into()));
    }
    let params = ProblemParams::new(raw.params.p, raw.params.gamma, raw.params.dim)
        .map_err(|e| Error::Config(format!("params: {e}")))?;

    if !(raw.tolerances.tol > 0.0) || !(raw.tolerances.transform_accuracy > 0.0) {
        return Err(Error::Config("tolerances: all tolerances must be > 0".into()));
    }
    if !(raw.radial.r_max > 0.0) {
        return Err(Error::Config("radial.r_max: must be > 0".into()));
    }
    if raw.radial.nodes < 16 {
        return Err(Error::Config("radial.nodes: at least 16 required".into()));
    }
    if !(raw.radial.grading >= 1.0) {
        return Err(Error::Config("radial.grading: must be ≥ 1".into()));
    }
    if !(raw.ball.mesh_h > 0.0) {
        return Err(Error::Config("ball.mesh_h: must be > 0".into()));
    }

    let nl = &raw.nonlinearity;
    let kind = match nl.kind.as_str() {
        "power" => NonlinearityKind::Power {
            coeff: nl.coeff.unwrap_or(1.0),
            exponent: nl
                .exponent
                .ok_or_else(|| Error::Config("nonlinearity.exponent: required for power kind".into()))?,
        },
        "power_log" => NonlinearityKind::PowerLog {
            coeff: nl.coeff.unwrap_or(1.0),
            exponent: nl.exponent.unwrap_or(0.0),
            log_exponent: nl
                .log_exponent
                .ok_or_else(|| Error::Config("nonlinearity.log_exponent: required for power_log kind".into()))?,
        },
        "tabulated" => {
            let csv = nl
                .csv
                .as_ref()
                .ok_or_else(|| Error::Config("nonlinearity.csv: required for tabulated kind".into()))?;
            let (xs, ys) = read_csv_table(&base_dir.join(csv))?;
            let table = MonotoneCubic::new(xs, ys)
                .map_err(|e| Error::Config(format!("nonlinearity.csv: {e}")))?;
            NonlinearityKind::Tabulated(table)
        }
        other => {
            return Err(Error::Config(format!(
                "nonlinearity.kind: unknown kind '{other}' (expected power | power_log | tabulated)"
            )))
        }
    };
    let nonlinearity = Nonlinearity::new(kind, nl.delta)
        .map_err(|e| Error::Config(format!("nonlinearity: {e}")))?;

    let pot = &raw.potential;
    let samples = pot.angular_samples.unwrap_or(256);
    let potential = match pot.kind.as_str() {
        "radial_profile" => {
            let profile = pot
                .profile
                .as_ref()
                .ok_or_else(|| Error::Config("potential.profile: required for radial_profile".into()))?;
            Potential::radial(build_profile(profile, base_dir, "potential.profile")?)
                .map_err(|e| Error::Config(format!("potential: {e}")))?
        }
        "radial_times_angular" => {
            let base = pot
                .base
                .as_ref()
                .ok_or_else(|| Error::Config("potential.base: required for radial_times_angular".into()))?;
            let modulation = pot.modulation.as_ref().ok_or_else(|| {
                Error::Config("potential.modulation: required for radial_times_angular".into())
            })?;
            Potential::radial_angular(
                build_profile(base, base_dir, "potential.base")?,
                build_profile(modulation, base_dir, "potential.modulation")?,
                pot.mode.unwrap_or(1),
                pot.phase.unwrap_or(0.0),
                raw.params.dim,
                samples,
            )
            .map_err(|e| Error::Config(format!("potential: {e}")))?
        }
        other => {
            return Err(Error::Config(format!(
                "potential.kind: unknown kind '{other}' (expected radial_profile | radial_times_angular)"
            )))
        }
    };

    // Task-required fields.
    let needs_alphas = matches!(
        raw.task,
        TaskKind::SolveRadial | TaskKind::SweepFamily | TaskKind::Sandwich | TaskKind::BallSolve | TaskKind::FullPipeline
    );
    let alphas = if raw.radial.alphas.is_empty() && needs_alphas {
        vec![2.0]
    } else {
        raw.radial.alphas.clone()
    };
    if needs_alphas {
        if alphas.iter().any(|&a| a <= 0.0) {
            return Err(Error::Config("radial.alphas: all center values must be > 0".into()));
        }
        if alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("radial.alphas: must be strictly increasing".into()));
        }
    }
    if matches!(raw.task, TaskKind::Sandwich | TaskKind::BallSolve) {
        if raw.params.p < 2.0 {
            return Err(Error::Config("task: the sandwich route requires p ≥ 2".into()));
        }
        if raw.radial.epsilon.is_none() {
            return Err(Error::Config("radial.epsilon: required for the sandwich route".into()));
        }
    }
    if raw.task == TaskKind::BallSolve {
        if raw.params.dim != 2 {
            return Err(Error::Config("params.dim: ball_solve is desk-scale (N = 2 required)".into()));
        }
        if raw.ball.radii.len() < 3 {
            return Err(Error::Config("ball.radii: at least three nested radii required".into()));
        }
        if raw.ball.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("ball.radii: must be strictly increasing".into()));
        }
    }

    Ok(RunConfig {
        task: raw.task,
        params,
        nonlinearity,
        potential,
        delta: nl.delta,
        tol: raw.tolerances.tol,
        transform_accuracy: raw.tolerances.transform_accuracy,
        r_max: raw.radial.r_max,
        nodes: raw.radial.nodes,
        grading: raw.radial.grading,
        max_iter: raw.radial.max_iter,
        overflow_guard: raw.radial.overflow_guard,
        alphas,
        epsilon: raw.radial.epsilon,
        mesh_h: raw.ball.mesh_h,
        ball_radii: raw.ball.radii.clone(),
        probe_points: raw.ball.probe_points.clone(),
        limit_tol: raw.ball.limit_tol,
        echo,
    })
}

/// Convenience for tests and the CLI: load a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    validate_config(&text, &base)
}
