//! Experiment dispatch and the JSON run summary.

use crate::config::{DataSource, ExperimentKind, FileConfig, RunConfig};
use crate::emit::{fmt_f64, fmt_opt, write_json, Table};
use crate::verify;
use serde::Serialize;
use serde_json::{json, Value};
use slipwave::bvp::{BoundaryMode, PhysicalParams};
use slipwave::geometry::eval_xi;
use slipwave::newton::{
    alpha_sweep, bottom_slip_norm, solve_nonlinear, solve_noslip_nonlinear, NonlinearSolution,
};
use slipwave::sampling::{seeded_rng, DEFAULT_BANDWIDTH};
use slipwave::spectral::{inverse_transform, SobolevNorm, SurfaceSpectrum};
use slipwave::surface::{DataMode, DataTuple, LinearSolver, SolutionState};
use slipwave::symbols::{m_weight, rho_weight, FittedBounds, SymbolRow, SymbolTable};
use slipwave::Error;
use std::path::PathBuf;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    UsageError,
    SolverFailure,
    VerificationFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::UsageError => 1,
            Status::SolverFailure => 2,
            Status::VerificationFailure => 3,
        }
    }
}

/// Machine-readable error in the run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ErrorRecord { code: code.to_string(), message: message.into() }
    }

    pub fn from_solver(e: &Error) -> Self {
        let code = match e {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParams(_) => "invalid_params",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Singular { .. } => "singular",
            Error::VanishingSymbol { .. } => "vanishing_symbol",
            Error::NotDiffeomorphism { .. } => "not_diffeomorphism",
            Error::LeftBall { .. } => "left_contraction_ball",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Unsupported(_) => "unsupported",
            Error::InsufficientRange(_) => "insufficient_range",
        };
        ErrorRecord::new(code, e.to_string())
    }
}

/// What an experiment produced.
pub struct Report {
    pub status: Status,
    pub result: Value,
    pub table: Option<Table>,
    pub errors: Vec<ErrorRecord>,
}

impl Report {
    fn ok(result: Value, table: Option<Table>) -> Self {
        Report { status: Status::Ok, result, table, errors: Vec::new() }
    }

    fn solver_failure(e: &Error) -> Self {
        Report { status: Status::SolverFailure, result: Value::Null, table: None, errors: vec![ErrorRecord::from_solver(e)] }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'static str,
    status: Status,
    exit_code: u8,
    config: &'a FileConfig,
    params: &'a PhysicalParams,
    result: &'a Value,
    errors: &'a [ErrorRecord],
    outputs: Outputs,
    version: &'static str,
}

#[derive(Serialize)]
struct Outputs {
    json: PathBuf,
    csv: Option<PathBuf>,
}

fn data_mode(bottom: BoundaryMode) -> DataMode {
    if bottom.has_slip() {
        DataMode::GenericL
    } else {
        DataMode::LZero
    }
}

/// Physical surface samples: `x_1 .. x_d, eta`.
fn surface_table(eta: &SurfaceSpectrum) -> Table {
    let g = eta.grid();
    let d = g.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    header.push("eta".into());
    let mut t = Table::new(header);
    for (p, v) in inverse_transform(eta).into_iter().enumerate() {
        let x = g.point(p, g.nx());
        let mut row = x[..d].to_vec();
        row.push(v);
        t.push_floats(&row);
    }
    t
}

fn max_height(eta: &SurfaceSpectrum) -> f64 {
    inverse_transform(eta).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn symbols(cfg: &RunConfig) -> Result<Report, Error> {
    let g = &cfg.grid;
    let d = g.dim();
    let mut table = Table::new(SymbolRow::header(d));
    let mut per_alpha = Vec::new();
    for &alpha in &cfg.alphas {
        let p = cfg.params.with_alpha(alpha);
        let t = SymbolTable::build(g, &p, cfg.experiment.bottom.mode())?;
        for row in t.rows() {
            table.push_floats(&row.values());
        }
        let nonzero: Vec<usize> = (0..g.n_freq()).filter(|&f| !g.is_nyquist(f) && !g.is_zero_freq(f)).collect();
        let xi_abs = |f: usize| g.xi_norm2(f).sqrt();
        let m_fit = FittedBounds::fit(nonzero.iter().map(|&f| t.m[f].norm() / m_weight(xi_abs(f))));
        let rho_fit =
            FittedBounds::fit(nonzero.iter().map(|&f| t.rho[f].norm_sqr() / rho_weight(&g.xi(f)[..d], p.sigma)));
        let max_re = nonzero.iter().map(|&f| t.m[f].conj().re).fold(f64::NEG_INFINITY, f64::max);
        let (dm, dr) = t.hermitian_defect();
        let bounds = |b: FittedBounds| json!({"lower": b.lower, "upper": b.upper, "spread": b.spread()});
        per_alpha.push(json!({
            "alpha": alpha,
            "hermitian_defect_m": dm,
            "hermitian_defect_rho": dr,
            "max_re_conj_m": max_re,
            "m_bounds": bounds(m_fit),
            "rho_sq_bounds": bounds(rho_fit),
        }));
    }
    let rows = table.rows.len();
    Ok(Report::ok(json!({"rows": rows, "alphas": per_alpha}), Some(table)))
}

fn linear_data(cfg: &RunConfig, bottom: BoundaryMode) -> Result<DataTuple, Error> {
    let mode = data_mode(bottom);
    Ok(match cfg.experiment.data {
        DataSource::Forcing => {
            let mut r = eval_xi(&SolutionState::zeros(&cfg.grid), &cfg.forcing, &cfg.params, bottom, mode)?;
            r.restrict_to_enforced();
            r.scaled(-1.0)
        }
        DataSource::Random => {
            DataTuple::random(&mut seeded_rng(cfg.experiment.seed), &cfg.grid, mode == DataMode::GenericL, DEFAULT_BANDWIDTH)
        }
    })
}

fn solve_linear(cfg: &RunConfig) -> Result<Report, Error> {
    let bottom = cfg.experiment.bottom.mode();
    let mode = data_mode(bottom);
    let s = cfg.experiment.regularity;
    let solver = LinearSolver::new(&cfg.grid, &cfg.params, bottom)?;
    let data = linear_data(cfg, bottom)?;
    let state = solver.solve_linear_full(&data, mode)?;
    let data_norm = data.norm(s);
    let defect = solver.apply(&state, mode).sub(&data).norm(s).total;
    let result = json!({
        "data_norm": data_norm,
        "solution_norm": state.norm(s),
        "roundtrip_defect": if data_norm.total > 0.0 { defect / data_norm.total } else { defect },
        "lambda_norm": solver.compute_lambda(&data, mode).norm_hs(0.0),
        "max_height": max_height(&state.eta),
        "bottom_slip_norm": bottom_slip_norm(&state),
        "max_condition": solver.max_condition(),
    });
    Ok(Report::ok(result, Some(surface_table(&state.eta))))
}

fn nonlinear_summary(sol: &NonlinearSolution, s: f64) -> Value {
    json!({
        "iterations": sol.iterations,
        "residual": sol.residual(),
        "residual_trace": sol.residual_trace,
        "step_norms": sol.step_norms,
        "contraction_factors": sol.contraction_factors(),
        "contraction_factor": sol.contraction_factor(),
        "forcing_norm": sol.forcing_norm,
        "solution_norm": sol.state.norm(s),
        "max_height": max_height(&sol.state.eta),
        "bottom_slip_norm": bottom_slip_norm(&sol.state),
    })
}

fn solve(cfg: &RunConfig) -> Result<Report, Error> {
    let sol = match cfg.experiment.bottom.mode() {
        BoundaryMode::NoSlip => solve_noslip_nonlinear(&cfg.grid, &cfg.forcing, &cfg.params, &cfg.solver)?,
        _ => solve_nonlinear(&cfg.grid, &cfg.forcing, &cfg.params, &cfg.solver)?,
    };
    Ok(Report::ok(nonlinear_summary(&sol, cfg.experiment.regularity), Some(surface_table(&sol.state.eta))))
}

fn is_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sweep(cfg: &RunConfig) -> Result<Report, Error> {
    let r = alpha_sweep(&cfg.grid, &cfg.forcing, &cfg.params, &cfg.alphas, &cfg.solver)?;
    let mut table = Table::new([
        "alpha",
        "iterations",
        "residual",
        "contraction_factor",
        "distance_u",
        "distance_p",
        "distance_eta",
        "distance",
        "trace_norm",
        "solution_norm",
        "error",
    ]);
    let mut errors = Vec::new();
    for e in &r.entries {
        table.push(vec![
            fmt_f64(e.alpha),
            e.iterations.map(|i| i.to_string()).unwrap_or_default(),
            fmt_opt(e.residual),
            fmt_opt(e.contraction_factor),
            fmt_opt(e.distance.map(|d| d.u)),
            fmt_opt(e.distance.map(|d| d.p)),
            fmt_opt(e.distance.map(|d| d.eta)),
            fmt_opt(e.distance.map(|d| d.total)),
            fmt_opt(e.trace_norm),
            fmt_opt(e.solution_norm.map(|n| n.total)),
            e.error.clone().unwrap_or_default(),
        ]);
        if let Some(msg) = &e.error {
            errors.push(ErrorRecord::new("sweep_entry_failed", format!("alpha = {}: {msg}", fmt_f64(e.alpha))));
        }
    }
    let distances = r.distances();
    let traces = r.trace_norms();
    let result = json!({
        "entries": r.entries,
        "reference_norm": r.reference_norm,
        "reference_iterations": r.reference_iterations,
        "sup_norm": r.sup_norm(),
        "distance_rate": r.distance_rate(),
        "distances_decreasing": is_decreasing(&distances),
        "trace_norms_decreasing": is_decreasing(&traces),
        "all_converged": r.all_converged(),
    });
    let status = if errors.is_empty() { Status::Ok } else { Status::SolverFailure };
    Ok(Report { status, result, table: Some(table), errors })
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &RunConfig) -> Report {
    let outcome = match cfg.kind {
        ExperimentKind::Symbols => symbols(cfg),
        ExperimentKind::SolveLinear => solve_linear(cfg),
        ExperimentKind::Solve => solve(cfg),
        ExperimentKind::SweepAlpha => sweep(cfg),
        ExperimentKind::Verify => Ok(verify::run(cfg)),
    };
    outcome.unwrap_or_else(|e| Report::solver_failure(&e))
}

/// Summary JSON for a finished report.
pub fn summary_json(cfg: &RunConfig, report: &Report) -> Result<String, serde_json::Error> {
    crate::emit::to_json(&summary(cfg, report))
}

fn summary<'a>(cfg: &'a RunConfig, report: &'a Report) -> Summary<'a> {
    Summary {
        experiment: cfg.kind.name(),
        status: report.status,
        exit_code: report.status.exit_code(),
        config: &cfg.echo,
        params: &cfg.params,
        result: &report.result,
        errors: &report.errors,
        outputs: Outputs { json: cfg.json_path.clone(), csv: report.table.as_ref().map(|_| cfg.csv_path.clone()) },
        version: env!("CARGO_PKG_VERSION"),
    }
}

/// Runs the experiment and writes the summary (and table, if any). I/O
/// failures are usage errors.
pub fn run(cfg: &RunConfig) -> Result<Status, String> {
    let dir = cfg.json_path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| format!("output.dir {}: {e}", dir.display()))?;
    }
    // Fail before a long run rather than after it.
    for path in [&cfg.json_path, &cfg.csv_path] {
        std::fs::OpenOptions::new()
            .append(true)
            .create(true)
            .open(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let report = execute(cfg);
    if let Some(t) = &report.table {
        t.write(&cfg.csv_path).map_err(|e| format!("{}: {e}", cfg.csv_path.display()))?;
    }
    write_json(&cfg.json_path, &summary(cfg, &report)).map_err(|e| format!("{}: {e}", cfg.json_path.display()))?;
    Ok(report.status)
}
