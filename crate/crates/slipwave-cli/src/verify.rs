//! The invariant suite behind `slipwave verify`.
//!
//! Every check runs on the configured grid and parameters with random data
//! from `experiment.seed` (check `i` uses seeds `seed + 1000 i + j`). A check
//! that errors counts as failed.

use crate::config::RunConfig;
use crate::emit::{fmt_f64, Table};
use crate::run::{ErrorRecord, Report, Status};
use serde::Serialize;
use serde_json::json;
use slipwave::bvp::BoundaryMode;
use slipwave::geometry::{eval_xi, ForcingSpec};
use slipwave::newton::{solve_from, uniformity_probe};
use slipwave::sampling::{random_velocity, seeded_rng, DEFAULT_BANDWIDTH};
use slipwave::spectral::transform::coeffs_to_samples;
use slipwave::spectral::SobolevNorm;
use slipwave::surface::{
    apply_overdetermined, apply_upsilon, divergence_trace_check, DataMode, DataTuple, LinearSolver, SolutionState,
};
use slipwave::{Complex64, Error};
use std::f64::consts::PI;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    /// Measured quantity compared with `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    solver: LinearSolver,
    samples: u64,
}

impl Ctx<'_> {
    fn seed(&self, check: u64, j: u64) -> u64 {
        self.cfg.experiment.seed.wrapping_add(1000 * check + j)
    }

    fn s(&self) -> f64 {
        self.cfg.experiment.regularity
    }

    fn mode(&self) -> DataMode {
        if self.solver.bottom().has_slip() {
            DataMode::GenericL
        } else {
            DataMode::LZero
        }
    }

    fn random_data(&self, seed: u64) -> DataTuple {
        DataTuple::random(&mut seeded_rng(seed), &self.cfg.grid, self.mode() == DataMode::GenericL, DEFAULT_BANDWIDTH)
    }
}

fn below(name: &'static str, value: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name, pass: value <= tolerance, value, tolerance, detail }
}

fn roundtrip(c: &Ctx) -> Result<CheckResult, Error> {
    let mut worst = 0.0f64;
    for j in 0..c.samples {
        let d = c.random_data(c.seed(1, j));
        let st = c.solver.solve_linear_full(&d, c.mode())?;
        worst = worst.max(c.solver.apply(&st, c.mode()).sub(&d).norm(c.s()).total / d.norm(c.s()).total);
    }
    Ok(below("linear_roundtrip", worst, 1e-8, format!("max relative defect over {} data tuples", c.samples)))
}

fn left_kernel(c: &Ctx) -> Result<CheckResult, Error> {
    let g = &c.cfg.grid;
    let s = c.s();
    let mut worst = 0.0f64;
    for j in 0..c.samples {
        let st = SolutionState::random(&mut seeded_rng(c.seed(2, j)), g, DEFAULT_BANDWIDTH);
        let d = apply_overdetermined(&st.u, &st.p, c.solver.params(), c.solver.bottom());
        let scale = (st.u.norm_hs(s + 2.0).powi(2) + st.p.norm_hs(s + 1.0).powi(2)).sqrt();
        worst = worst.max(c.solver.compute_lambda(&d, c.mode()).norm_hs(0.0) / scale);

        let d = c.random_data(c.seed(2, c.samples + j));
        let eta = c.solver.construct_eta(&d, c.mode())?;
        let lam = c.solver.compute_lambda(&c.solver.modified_data(&d, &eta), c.mode());
        worst = worst.max(lam.norm_hs(0.0) / d.norm(s).total);
    }
    Ok(below("left_kernel", worst, 1e-8, "compatibility functional on strong states and modified data".into()))
}

fn divergence_trace(c: &Ctx) -> Result<CheckResult, Error> {
    let mut rng = seeded_rng(c.seed(3, 0));
    let count = 5 * c.samples;
    let worst = (0..count)
        .map(|_| divergence_trace_check(&random_velocity(&mut rng, &c.cfg.grid, DEFAULT_BANDWIDTH)).ratio)
        .fold(0.0, f64::max);
    let bound = 2.0 * PI * c.cfg.grid.depth().sqrt();
    Ok(below(
        "divergence_trace",
        worst,
        1.0 + 1e-6,
        format!("max seminorm / (2 pi sqrt(b) ||u||) over {count} fields; 2 pi sqrt(b) = {}", fmt_f64(bound)),
    ))
}

fn symbol_sign(c: &Ctx) -> Result<CheckResult, Error> {
    let g = &c.cfg.grid;
    let t = c.solver.symbols();
    let worst = (0..g.n_freq())
        .filter(|&f| !g.is_nyquist(f) && !g.is_zero_freq(f))
        .map(|f| t.m[f].conj().re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckResult {
        name: "symbol_sign",
        pass: worst < 0.0,
        value: worst,
        tolerance: 0.0,
        detail: "largest Re conj m over nonzero lattice frequencies (must be negative)".into(),
    })
}

fn reality(c: &Ctx) -> Result<CheckResult, Error> {
    let g = &c.cfg.grid;
    let mut worst_im = 0.0f64;
    for j in 0..c.samples.min(5) {
        let eta = c.solver.construct_eta(&c.random_data(c.seed(5, j)), c.mode())?;
        let coeffs: Vec<Complex64> = (0..g.n_freq()).map(|f| eta.get(f, 0)).collect();
        worst_im = coeffs_to_samples(g, &coeffs).iter().fold(worst_im, |m, v| m.max(v.im.abs()));
    }
    let t = c.solver.symbols();
    let (dm, dr) = t.hermitian_defect();
    let scale_m = t.m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale_r = t.rho.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let symmetric = dm <= 1e-14 * scale_m && dr <= 1e-14 * scale_r;
    Ok(CheckResult {
        name: "reality",
        pass: worst_im < 1e-13 && symmetric,
        value: worst_im,
        tolerance: 1e-13,
        detail: format!("largest Im eta; Hermitian defects m {}, rho {}", fmt_f64(dm), fmt_f64(dr)),
    })
}

fn commutation(c: &Ctx) -> Result<CheckResult, Error> {
    let mut mismatches = 0usize;
    for (j, cut) in [0.3, 1.5, 4.0].into_iter().enumerate() {
        let keep = move |xi: &[f64]| xi[0].abs() <= cut;
        let d = c.random_data(c.seed(6, j as u64));
        let a = c.solver.solve_linear_full(&d.filtered(keep), c.mode())?;
        let b = c.solver.solve_linear_full(&d, c.mode())?.filtered(keep);
        let la = c.solver.compute_lambda(&d.filtered(keep), c.mode());
        let mut lb = c.solver.compute_lambda(&d, c.mode());
        lb.filter_in_place(keep);
        mismatches += usize::from(a != b) + usize::from(la != lb);
    }
    Ok(below("multiplier_commutation", mismatches as f64, 0.0, "bitwise mismatches of filtered solve and Lambda".into()))
}

fn nonlinear(c: &Ctx) -> Result<CheckResult, Error> {
    let cfg = c.cfg;
    let g = &cfg.grid;
    let a = solve_from(&c.solver, &cfg.forcing, &cfg.solver, &SolutionState::zeros(g))?;
    let factor = a.contraction_factor().unwrap_or(0.0);
    let start = c.solver.solve_linear_full(&c.random_data(c.seed(7, 0)), c.mode())?;
    let start = start.scaled(1e-3 / start.max_abs());
    let b = solve_from(&c.solver, &cfg.forcing, &cfg.solver, &start)?;
    let gap = a.state.sub(&b.state).norm(c.s()).total;
    let tol = cfg.solver.tol;
    let pass = factor <= 0.5 && gap <= 10.0 * tol;
    Ok(CheckResult {
        name: "nonlinear_solve",
        pass,
        value: factor,
        tolerance: 0.5,
        detail: format!(
            "contraction factor; residual {} after {} iterations, second start gap {} (limit {})",
            fmt_f64(a.residual()),
            a.iterations,
            fmt_f64(gap),
            fmt_f64(10.0 * tol)
        ),
    })
}

fn linearization(c: &Ctx) -> Result<CheckResult, Error> {
    let p = c.solver.params();
    let mut worst = 0.0f64;
    for bottom in [BoundaryMode::Slip, BoundaryMode::NoSlip] {
        let dir = SolutionState::random(&mut seeded_rng(c.seed(8, 0)), &c.cfg.grid, DEFAULT_BANDWIDTH);
        let eps = 1e-5 / dir.max_abs();
        let zero = ForcingSpec::default();
        let plus = eval_xi(&dir.scaled(eps), &zero, p, bottom, DataMode::GenericL)?;
        let minus = eval_xi(&dir.scaled(-eps), &zero, p, bottom, DataMode::GenericL)?;
        let fd = plus.sub(&minus).scaled(0.5 / eps);
        let lin = apply_upsilon(&dir, p, bottom, DataMode::GenericL);
        worst = worst.max(fd.sub(&lin).norm(c.s()).total / lin.norm(c.s()).total);
    }
    Ok(below("linearization_at_zero", worst, 1e-6, "central differences of the residual against the linear operator".into()))
}

fn alpha_uniformity(c: &Ctx) -> Result<CheckResult, Error> {
    let probe = uniformity_probe(&c.cfg.grid, c.solver.params(), &c.cfg.alphas, c.s())?;
    let norms: Vec<String> = probe.entries.iter().map(|e| fmt_f64(e.norm)).collect();
    Ok(below("alpha_uniformity", probe.ratio(), 2.0, format!("max/min solve-norm estimate over alphas [{}]", norms.join(", "))))
}

type Check = fn(&Ctx) -> Result<CheckResult, Error>;

const CHECKS: [(&str, Check); 9] = [
    ("linear_roundtrip", roundtrip),
    ("left_kernel", left_kernel),
    ("divergence_trace", divergence_trace),
    ("symbol_sign", symbol_sign),
    ("reality", reality),
    ("multiplier_commutation", commutation),
    ("nonlinear_solve", nonlinear),
    ("linearization_at_zero", linearization),
    ("alpha_uniformity", alpha_uniformity),
];

/// Runs every check. The slip-parameter probe only applies to the slip
/// bottom and is skipped otherwise.
pub fn run(cfg: &RunConfig) -> Report {
    let bottom = cfg.experiment.bottom.mode();
    let solver = match LinearSolver::new(&cfg.grid, &cfg.params, bottom) {
        Ok(s) => s,
        Err(e) => {
            return Report {
                status: Status::SolverFailure,
                result: serde_json::Value::Null,
                table: None,
                errors: vec![ErrorRecord::from_solver(&e)],
            }
        }
    };
    let ctx = Ctx { cfg, solver, samples: cfg.experiment.samples as u64 };
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (name, check) in CHECKS {
        if name == "alpha_uniformity" && !bottom.has_slip() {
            continue;
        }
        let r = check(&ctx).unwrap_or_else(|e| {
            errors.push(ErrorRecord::from_solver(&e));
            CheckResult { name, pass: false, value: f64::NAN, tolerance: f64::NAN, detail: e.to_string() }
        });
        results.push(r);
    }
    let mut table = Table::new(["check", "pass", "value", "tolerance", "detail"]);
    for r in &results {
        table.push(vec![r.name.into(), r.pass.to_string(), fmt_f64(r.value), fmt_f64(r.tolerance), r.detail.clone()]);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    let status = if failed.is_empty() { Status::Ok } else { Status::VerificationFailure };
    Report { status, result: json!({"checks": results, "failed": failed}), table: Some(table), errors }
}
