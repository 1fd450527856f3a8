//! Run orchestration: hypothesis gating, task execution, and deterministic
//! emission of CSV profiles, gnuplot-ready data files, and the JSON run
//! report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conditions::{hypothesis_matrix, CompatibilityReport};
use crate::config::{RunConfig, TaskKind};
use crate::error::{Error, Result};
use crate::radial::{
    picard_solve, residual_original, sweep_family, RadialSolution, SolverOptions, ThresholdEstimate,
};
use crate::sandwich::{
    bracketing_pair_with_beta, build_bracketing_pair, cal_g_growth_bound, dirichlet_monotone_solve,
    extract_limit, BallOptions, BallSolution, LimitReport, SandwichReport,
};
use crate::transform::{log_grid, DualTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    HypothesisFailure,
    ComputeError,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub alpha: f64,
    pub u_center: f64,
    pub w_at_rmax: f64,
    pub residual_max: Option<f64>,
    pub m_constant: Option<f64>,
    pub iterations: usize,
    pub picard_residual: Option<f64>,
    pub ode_crosscheck_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BallSummary {
    pub n_radius: u32,
    pub mesh_h: f64,
    pub iterations: usize,
    pub sandwich_ok: bool,
    pub max_bracket_violation: f64,
    pub center_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertySummary {
    pub passed: usize,
    pub total: usize,
    pub all_passed: bool,
    pub empirical_c: f64,
    pub small_limit_deviation: f64,
    pub large_limit_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub task: String,
    pub status: RunStatus,
    pub config_echo: serde_json::Value,
    pub hypotheses_verified: bool,
    pub transform_properties: Option<PropertySummary>,
    pub hypotheses: Option<CompatibilityReport<f64>>,
    pub threshold: Option<ThresholdEstimate<f64>>,
    pub solutions: Vec<SolutionSummary>,
    pub sandwich: Option<SandwichReport<f64>>,
    /// `u(0) = f(w(0))` of the bracket pair; the w-level bracket is the
    /// one checked, the u-level values are recorded alongside.
    pub u_center_bracket: Option<(f64, f64)>,
    pub growth_bound_crossover: Option<f64>,
    pub balls: Vec<BallSummary>,
    pub limit: Option<LimitReport<f64>>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub files: Vec<FileRecord>,
    pub timing_ms: u128,
}

pub struct RunOutcome {
    pub status: RunStatus,
    pub report: RunReport,
    pub report_path: PathBuf,
}

/// 17 significant digits, '.' decimal, deterministic across runs.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

struct Emitter {
    out_dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Emitter {
    fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Emitter { out_dir: out_dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content.as_bytes())?;
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        let sha256 = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.files.push(FileRecord { path: name.to_string(), sha256 });
        Ok(())
    }

    fn radial_csv(&mut self, name: &str, sol: &RadialSolution<f64>, residual: &[f64]) -> Result<()> {
        let mut csv = String::from("r,w,u,residual\n");
        let mut dat = String::from("# r w u residual\n");
        for i in 0..sol.radii.len() {
            let row = [fmt(sol.radii[i]), fmt(sol.w[i]), fmt(sol.u[i]), fmt(residual[i])];
            csv.push_str(&row.join(","));
            csv.push('\n');
            dat.push_str(&row.join(" "));
            dat.push('\n');
        }
        self.write(&format!("{name}.csv"), &csv)?;
        self.write(&format!("{name}.dat"), &dat)
    }

    fn ball_csv(&mut self, name: &str, ball: &BallSolution<f64>) -> Result<()> {
        let nx = ball.nx();
        let mut csv = String::from("x,y,w\n");
        let mut dat = String::from("# x y w\n");
        for j in 0..nx {
            for i in 0..nx {
                let row = [fmt(ball.coords[i]), fmt(ball.coords[j]), fmt(ball.w[j * nx + i])];
                csv.push_str(&row.join(","));
                csv.push('\n');
                dat.push_str(&row.join(" "));
                dat.push('\n');
            }
            dat.push('\n'); // gnuplot grid blocks
        }
        self.write(&format!("{name}.csv"), &csv)?;
        self.write(&format!("{name}.dat"), &dat)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json(e.to_string()))?;
        self.write(name, &text)
    }
}

fn residual_column(
    sol: &RadialSolution<f64>,
    cfg: &RunConfig,
    a_radial: &(dyn Fn(f64) -> f64 + Sync),
) -> (Vec<f64>, f64) {
    // The centered radial stencil loses accuracy approaching the axis, so
    // the reported residual starts at a small fraction of the range.
    let r_max = sol.radii[sol.radii.len() - 1];
    let window = (0.01 * r_max, 0.999 * r_max);
    let prof = residual_original(sol, a_radial, &cfg.nonlinearity, &cfg.params, window);
    let mut column = vec![0.0; sol.radii.len()];
    let mut k = 0usize;
    for i in 0..sol.radii.len() {
        if k < prof.radii.len() && (sol.radii[i] - prof.radii[k]).abs() < 1e-14 {
            column[i] = prof.residual[k];
            k += 1;
        }
    }
    (column, prof.max_abs)
}

fn summarize(sol: &RadialSolution<f64>, residual_max: Option<f64>) -> SolutionSummary {
    SolutionSummary {
        alpha: sol.alpha,
        u_center: sol.u_center(),
        w_at_rmax: sol.w_at_rmax(),
        residual_max,
        m_constant: sol.blowup_lower_bound_constant,
        iterations: sol.iterations,
        picard_residual: sol.picard_residual,
        ode_crosscheck_deviation: sol.ode_crosscheck_deviation,
    }
}

/// Executes the configured task graph and writes every artifact under
/// `out_dir`. Exactly one `report.json` is always written, including on
/// partial failure; hypothesis gates stop solves unless overridden.
pub fn run(cfg: &RunConfig, out_dir: &Path, override_hypotheses: bool) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut em = Emitter::new(out_dir)?;
    let mut warnings: Vec<String> = Vec::new();
    let mut errors: Vec<String> = Vec::new();
    let mut status = RunStatus::Success;
    let mut hypotheses_verified = false;

    let mut transform_properties = None;
    let mut hypotheses: Option<CompatibilityReport<f64>> = None;
    let mut threshold = None;
    let mut solutions: Vec<SolutionSummary> = Vec::new();
    let mut sandwich_report = None;
    let mut u_center_bracket = None;
    let mut growth_bound_crossover = None;
    let mut balls: Vec<BallSummary> = Vec::new();
    let mut limit = None;

    let dual = DualTransform::with_accuracy(cfg.params, cfg.transform_accuracy);
    let solver_opts = SolverOptions {
        r_max: cfg.r_max,
        nodes: cfg.nodes,
        grading: cfg.grading,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        relaxation: 1.0,
        overflow_guard: cfg.overflow_guard,
    };

    let wants_transform = matches!(cfg.task, TaskKind::VerifyTransform | TaskKind::FullPipeline);
    let wants_hypotheses = !matches!(cfg.task, TaskKind::VerifyTransform);
    let wants_radial = matches!(
        cfg.task,
        TaskKind::SolveRadial | TaskKind::SweepFamily | TaskKind::FullPipeline
    );
    let wants_sandwich = matches!(cfg.task, TaskKind::Sandwich | TaskKind::BallSolve)
        || (cfg.task == TaskKind::FullPipeline && !cfg.potential.is_radial() && cfg.epsilon.is_some());
    let wants_balls = cfg.task == TaskKind::BallSolve
        || (cfg.task == TaskKind::FullPipeline
            && cfg.params.dim() == 2
            && cfg.epsilon.is_some()
            && cfg.ball_radii.len() >= 3);

    // Transform verification.
    if wants_transform {
        let two_gamma_m1 = 2.0 * cfg.params.gamma() - 1.0;
        let delta = cfg.delta.unwrap_or(two_gamma_m1.max(0.0));
        let mut grid = vec![0.0];
        grid.extend(log_grid(1e-6, 1e8, 41));
        match dual.verify_properties(&grid, delta) {
            Ok(rep) => {
                transform_properties = Some(PropertySummary {
                    passed: rep.passed_count(),
                    total: rep.checks.len(),
                    all_passed: rep.all_passed,
                    empirical_c: rep.empirical_c,
                    small_limit_deviation: rep.small_limit_deviation,
                    large_limit_deviation: rep.large_limit_deviation,
                });
                if !rep.all_passed {
                    warnings.push("transform property suite reported failures".into());
                }
                em.json("transform_properties.json", &rep)?;
            }
            Err(e) => {
                errors.push(format!("verify_transform: {e}"));
                status = RunStatus::ComputeError;
            }
        }
    }

    // Hypothesis table and gate.
    let mut gate_open = true;
    if wants_hypotheses {
        match hypothesis_matrix(&cfg.params, &cfg.nonlinearity, &cfg.potential, cfg.delta) {
            Ok(rep) => {
                let relevant = if wants_sandwich {
                    rep.sandwich_applicable
                } else {
                    rep.radial_family_applicable
                };
                hypotheses_verified = relevant == Some(true);
                if relevant == Some(false) {
                    if override_hypotheses {
                        warnings.push(
                            "hypotheses fail; proceeding under --override-hypotheses, results are \
                             outside the verified-hypothesis regime"
                                .into(),
                        );
                    } else {
                        gate_open = false;
                        status = RunStatus::HypothesisFailure;
                    }
                } else if relevant.is_none() {
                    warnings.push("some hypotheses are inconclusive; results are outside the verified-hypothesis regime".into());
                }
                em.json("hypotheses.json", &rep)?;
                hypotheses = Some(rep);
            }
            Err(e) => {
                errors.push(format!("check_hypotheses: {e}"));
                status = RunStatus::ComputeError;
                gate_open = false;
            }
        }
    }

    let solves_requested = wants_radial || wants_sandwich || wants_balls;
    if solves_requested && gate_open && status != RunStatus::ComputeError {
        let mut run_solves = || -> Result<()> {
            let upper = |r: f64| cfg.potential.radialize(r).map(|e| e.upper).unwrap_or(f64::NAN);

            if wants_radial {
                if !cfg.potential.is_radial() {
                    warnings.push(
                        "potential is not radial: the radial family solves against the upper \
                         envelope ā"
                            .into(),
                    );
                }
                if cfg.task == TaskKind::SweepFamily || cfg.task == TaskKind::FullPipeline {
                    let fam =
                        sweep_family(&cfg.params, &upper, &cfg.nonlinearity, &dual, &cfg.alphas, &solver_opts)?;
                    if fam.comparison_defect > 1e-8 {
                        warnings.push(format!(
                            "family ordering defect {} exceeds tolerance",
                            fam.comparison_defect
                        ));
                    }
                    for (i, sol) in fam.solutions.iter().enumerate() {
                        let (col, max_abs) = residual_column(sol, cfg, &upper);
                        em.radial_csv(&format!("radial_{i:02}"), sol, &col)?;
                        solutions.push(summarize(sol, Some(max_abs)));
                    }
                    threshold = Some(fam.threshold.clone());
                } else {
                    for (i, &alpha) in cfg.alphas.iter().enumerate() {
                        let sol =
                            picard_solve(&cfg.params, &upper, &cfg.nonlinearity, &dual, alpha, &solver_opts)?;
                        let (col, max_abs) = residual_column(&sol, cfg, &upper);
                        em.radial_csv(&format!("radial_{i:02}"), &sol, &col)?;
                        solutions.push(summarize(&sol, Some(max_abs)));
                    }
                }
            }

            let mut bracket: Option<(RadialSolution<f64>, RadialSolution<f64>)> = None;
            if wants_sandwich {
                let alpha = cfg.alphas.first().copied().unwrap_or(2.0);
                let epsilon = cfg.epsilon.unwrap_or(0.5);
                let mut ball_reach_opts = solver_opts;
                if wants_balls {
                    let need = cfg.ball_radii.iter().copied().max().unwrap_or(0) as f64 * 1.5;
                    ball_reach_opts.r_max = ball_reach_opts.r_max.max(need);
                }
                let pair = match build_bracketing_pair(
                    &cfg.params,
                    &cfg.potential,
                    &cfg.nonlinearity,
                    &dual,
                    alpha,
                    epsilon,
                    &ball_reach_opts,
                ) {
                    Ok(x) => Some(x),
                    Err(Error::Hypothesis(msg)) if override_hypotheses => {
                        // Overridden: fall back to the truncated budget.
                        let hb = crate::conditions::compute_hbar(
                            &cfg.potential,
                            &cfg.nonlinearity,
                            &cfg.params,
                            1e-9,
                        )?;
                        let trunc = hb.probe_values.last().map(|&(_, v)| v).unwrap_or(0.0);
                        warnings.push(format!(
                            "{msg}; overridden with the truncated budget {trunc}"
                        ));
                        let beta = alpha + epsilon + trunc;
                        let (wa, wb, mut rep) = bracketing_pair_with_beta(
                            &cfg.params,
                            &cfg.potential,
                            &cfg.nonlinearity,
                            &dual,
                            alpha,
                            beta,
                            &ball_reach_opts,
                        )?;
                        rep.epsilon = epsilon;
                        rep.hbar = trunc;
                        Some((wa, wb, rep))
                    }
                    Err(e) => return Err(e),
                };
                if let Some((wa, wb, rep)) = pair {
                    u_center_bracket = Some((wa.u_center(), wb.u_center()));
                    let lower = |r: f64| cfg.potential.radialize(r).map(|e| e.lower).unwrap_or(f64::NAN);
                    let (col_a, max_a) = residual_column(&wa, cfg, &upper);
                    em.radial_csv("bracket_alpha", &wa, &col_a)?;
                    solutions.push(summarize(&wa, Some(max_a)));
                    let (col_b, max_b) = residual_column(&wb, cfg, &lower);
                    em.radial_csv("bracket_beta", &wb, &col_b)?;
                    solutions.push(summarize(&wb, Some(max_b)));
                    match cal_g_growth_bound(&wa, &cfg.potential, &cfg.nonlinearity, &cfg.params) {
                        Ok(gb) => growth_bound_crossover = gb.crossover,
                        Err(e) => warnings.push(format!("growth majorant: {e}")),
                    }
                    em.json("sandwich.json", &rep)?;
                    sandwich_report = Some(rep);
                    bracket = Some((wa, wb));
                }
            }

            if wants_balls {
                let (wa, wb) = bracket
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("ball solve needs a bracketing pair".into()))?;
                let ball_opts = BallOptions {
                    mesh_h: cfg.mesh_h,
                    tol: cfg.tol.max(1e-10),
                    max_sweeps: 4000,
                    kappa_floor: 1e-8,
                };
                let mut solved = Vec::new();
                for &n in &cfg.ball_radii {
                    let ball = dirichlet_monotone_solve(
                        &cfg.params,
                        &cfg.potential,
                        &cfg.nonlinearity,
                        &dual,
                        n,
                        wa,
                        wb,
                        &ball_opts,
                    )?;
                    em.ball_csv(&format!("ball_{n:02}"), &ball)?;
                    balls.push(BallSummary {
                        n_radius: n,
                        mesh_h: ball.mesh_h,
                        iterations: ball.iterations,
                        sandwich_ok: ball.sandwich_ok,
                        max_bracket_violation: ball.max_bracket_violation,
                        center_value: ball.eval(0.0, 0.0),
                    });
                    solved.push(ball);
                }
                let probes = if cfg.probe_points.is_empty() {
                    let n1 = cfg.ball_radii[0] as f64;
                    vec![(0.3 * n1, 0.0), (0.0, 0.55 * n1), (0.45 * n1, 0.45 * n1)]
                } else {
                    cfg.probe_points.clone()
                };
                let rep = extract_limit(&solved, &probes, cfg.limit_tol)?;
                if !rep.stabilized {
                    warnings.push("nested-ball values did not stabilize at the probes".into());
                }
                limit = Some(rep);
            }
            Ok(())
        };
        if let Err(e) = run_solves() {
            errors.push(e.to_string());
            status = RunStatus::ComputeError;
        }
    }

    let report = RunReport {
        schema_version: 1,
        task: cfg.task.name().to_string(),
        status,
        config_echo: cfg.echo.clone(),
        hypotheses_verified,
        transform_properties,
        hypotheses,
        threshold,
        solutions,
        sandwich: sandwich_report,
        u_center_bracket,
        growth_bound_crossover,
        balls,
        limit,
        warnings,
        errors,
        files: em.files.clone(),
        timing_ms: start.elapsed().as_millis(),
    };
    let report_path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Json(e.to_string()))?;
    std::fs::write(&report_path, text)?;
    Ok(RunOutcome { status, report, report_path })
}
