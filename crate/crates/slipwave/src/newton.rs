//! Nonlinear solves, the slip-limit sweep and the alpha-uniformity probe.
//!
//! The default iteration freezes the Jacobian at the flat state:
//!
//! ```text
//! x <- x - damping * Upsilon^-1 Xi(x)
//! ```
//!
//! where `Xi` is the nonlinear residual of
//! [`eval_xi`](crate::geometry::eval_xi) and `Upsilon^-1` is the fast
//! per-frequency linear solve. Newton mode instead solves
//! `Xi'(x) dx = Xi(x)` by GMRES preconditioned with `Upsilon^-1`, using
//! central differences of `Xi` for the directional derivatives.
//!
//! Every iterate is checked against the admissible ball: the flattening map
//! must stay comfortably invertible (`min J > 0.05`) and the surface norm
//! must stay below `ball_radius`.

use crate::bvp::{BoundaryMode, FrequencyData, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::{build_flattening, eval_xi, ForcingSpec};
use crate::parallel;
use crate::sampling::{seeded_rng, uniform};
use crate::spectral::norms::{derivative_orders, norm_xs, strip_weight, xs_weight, SobolevNorm};
use crate::spectral::Grid;
use crate::surface::{DataMode, DataTuple, LinearSolver, SolutionState, StateNorm, DEFAULT_REGULARITY};
use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Smallest admissible Jacobian of the flattening map.
pub const MIN_JACOBIAN: f64 = 0.05;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How each correction is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationMode {
    /// Frozen linearization at zero.
    #[default]
    Contraction,
    /// Re-linearized at every iterate (matrix-free GMRES).
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual tolerance relative to `max(1, ||Xi(0)||)`.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: IterationMode,
    /// Largest admissible surface norm.
    pub ball_radius: f64,
    /// Fraction of each correction that is applied.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_iter: 40, mode: IterationMode::Contraction, ball_radius: 1.0, damping: 1.0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("solver.tol must be finite and > 0, got {}", self.tol));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("solver.damping must lie in (0, 1], got {}", self.damping));
        }
        if self.max_iter == 0 {
            return bad("solver.max_iter must be at least 1".into());
        }
        if !(self.ball_radius > 0.0) {
            return bad(format!("solver.ball_radius must be > 0, got {}", self.ball_radius));
        }
        Ok(())
    }
}

/// Converged state and the iteration history.
#[derive(Debug, Clone)]
pub struct NonlinearSolution {
    pub state: SolutionState,
    /// Number of corrections applied.
    pub iterations: usize,
    /// Residual norm at every iterate, starting with the initial guess.
    pub residual_trace: Vec<f64>,
    /// Norm of every applied correction.
    pub step_norms: Vec<f64>,
    /// `||Xi(0)||`, the size of the forcing as seen by the residual.
    pub forcing_norm: f64,
}

impl NonlinearSolution {
    pub fn residual(&self) -> f64 {
        *self.residual_trace.last().expect("trace starts with the initial residual")
    }

    /// Ratios of consecutive correction norms.
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.step_norms.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Largest observed ratio of consecutive corrections, if there were at
    /// least two.
    pub fn contraction_factor(&self) -> Option<f64> {
        self.contraction_factors().into_iter().reduce(f64::max)
    }
}

fn data_mode(bottom: BoundaryMode) -> DataMode {
    if bottom.has_slip() {
        DataMode::GenericL
    } else {
        DataMode::LZero
    }
}

/// Residual restricted to the equations the discretization enforces.
fn restricted_residual(
    state: &SolutionState,
    forcing: &ForcingSpec,
    solver: &LinearSolver,
    iteration: usize,
) -> Result<DataTuple> {
    let mut r = eval_xi(state, forcing, solver.params(), solver.bottom(), data_mode(solver.bottom())).map_err(|e| {
        match e {
            Error::NotDiffeomorphism { min_j } => {
                Error::LeftBall { iteration, reason: format!("flattening map folds (min J = {min_j:.3e})") }
            }
            e => e,
        }
    })?;
    r.restrict_to_enforced();
    Ok(r)
}

fn check_ball(state: &SolutionState, radius: f64, iteration: usize) -> Result<()> {
    let eta = norm_xs(&state.eta, DEFAULT_REGULARITY + 2.5).total;
    if !(eta < radius) {
        return Err(Error::LeftBall { iteration, reason: format!("surface norm {eta:.3e} exceeds {radius:.3e}") });
    }
    let min_j = match build_flattening(&state.eta, state.grid()) {
        Ok(maps) => maps.min_jacobian(),
        Err(Error::NotDiffeomorphism { min_j }) => min_j,
        Err(e) => return Err(e),
    };
    if !(min_j > MIN_JACOBIAN) {
        return Err(Error::LeftBall { iteration, reason: format!("min J = {min_j:.3e} below {MIN_JACOBIAN}") });
    }
    Ok(())
}

/// Iterates from `initial` with the linear solver's parameters and bottom
/// condition. The initial state must satisfy the bottom conditions built
/// into the solver (for instance zero, or any output of the linear solve).
pub fn solve_from(
    solver: &LinearSolver,
    forcing: &ForcingSpec,
    config: &SolverConfig,
    initial: &SolutionState,
) -> Result<NonlinearSolution> {
    config.validate()?;
    forcing.validate(solver.grid().dim())?;
    let s = DEFAULT_REGULARITY;
    let mode = data_mode(solver.bottom());
    let grid = solver.grid();
    let forcing_norm = restricted_residual(&SolutionState::zeros(grid), forcing, solver, 0)?.norm(s).total;
    let target = config.tol * forcing_norm.max(1.0);

    let mut x = initial.clone();
    check_ball(&x, config.ball_radius, 0)?;
    let mut r = restricted_residual(&x, forcing, solver, 0)?;
    let mut trace = vec![r.norm(s).total];
    let mut steps = Vec::new();
    for it in 1..=config.max_iter {
        if trace[it - 1] <= target {
            break;
        }
        let step = match config.mode {
            IterationMode::Contraction => solver.solve_linear_full(&r, mode)?,
            IterationMode::Newton => newton_step(solver, forcing, &x, &r, it)?,
        };
        x.axpy(-config.damping, &step);
        steps.push(config.damping * step.norm(s).total);
        check_ball(&x, config.ball_radius, it)?;
        r = restricted_residual(&x, forcing, solver, it)?;
        let rn = r.norm(s).total;
        if !rn.is_finite() {
            return Err(Error::NoConvergence { iterations: it, trace });
        }
        trace.push(rn);
    }
    if *trace.last().expect("nonempty") > target {
        return Err(Error::NoConvergence { iterations: steps.len(), trace });
    }
    Ok(NonlinearSolution { state: x, iterations: steps.len(), residual_trace: trace, step_norms: steps, forcing_norm })
}

/// Steady traveling wave over the slip bottom, starting from rest.
pub fn solve_nonlinear(
    grid: &Grid,
    forcing: &ForcingSpec,
    params: &PhysicalParams,
    config: &SolverConfig,
) -> Result<NonlinearSolution> {
    let solver = LinearSolver::new(grid, params, BoundaryMode::Slip)?;
    solve_from(&solver, forcing, config, &SolutionState::zeros(grid))
}

/// Same as [`solve_nonlinear`] with `u = 0` at the bottom; `alpha`, `beta`
/// and the slip law are ignored.
pub fn solve_noslip_nonlinear(
    grid: &Grid,
    forcing: &ForcingSpec,
    params: &PhysicalParams,
    config: &SolverConfig,
) -> Result<NonlinearSolution> {
    let solver = LinearSolver::new(grid, params, BoundaryMode::NoSlip)?;
    solve_from(&solver, forcing, config, &SolutionState::zeros(grid))
}

/// Krylov dimension of one Newton correction.
const GMRES_MAX_DIM: usize = 30;
/// Relative tolerance of the preconditioned Newton system.
const GMRES_TOL: f64 = 1e-12;
/// Relative size of the finite-difference step.
const FD_STEP: f64 = 1e-6;

/// Solves `Upsilon^-1 Xi'(x) dx = Upsilon^-1 Xi(x)` by GMRES in the
/// coefficient inner product.
fn newton_step(
    solver: &LinearSolver,
    forcing: &ForcingSpec,
    x: &SolutionState,
    r: &DataTuple,
    iteration: usize,
) -> Result<SolutionState> {
    let mode = data_mode(solver.bottom());
    let scale = x.max_abs().max(1.0);
    let apply = |v: &SolutionState| -> Result<SolutionState> {
        let eps = FD_STEP * scale / v.max_abs();
        let mut plus = x.clone();
        plus.axpy(eps, v);
        let mut minus = x.clone();
        minus.axpy(-eps, v);
        let jv = restricted_residual(&plus, forcing, solver, iteration)?
            .sub(&restricted_residual(&minus, forcing, solver, iteration)?)
            .scaled(0.5 / eps);
        solver.solve_linear_full(&jv, mode)
    };
    let b = solver.solve_linear_full(r, mode)?;
    let beta = b.dot(&b).sqrt();
    if beta == 0.0 {
        return Ok(b);
    }
    let mut basis = vec![b.scaled(1.0 / beta)];
    let mut hess = DMatrix::<f64>::zeros(GMRES_MAX_DIM + 1, GMRES_MAX_DIM);
    let mut y = DVector::<f64>::zeros(0);
    for k in 0..GMRES_MAX_DIM {
        let mut w = apply(&basis[k])?;
        for (i, v) in basis.iter().enumerate() {
            let h = w.dot(v);
            hess[(i, k)] = h;
            w.axpy(-h, v);
        }
        let norm = w.dot(&w).sqrt();
        hess[(k + 1, k)] = norm;
        let h = hess.view((0, 0), (k + 2, k + 1)).into_owned();
        let mut rhs = DVector::<f64>::zeros(k + 2);
        rhs[0] = beta;
        y = h.clone().svd(true, true).solve(&rhs, 1e-300).map_err(|e| Error::Unsupported(e.to_string()))?;
        let res = (rhs - h * &y).norm();
        if res <= GMRES_TOL * beta || norm <= f64::EPSILON * beta {
            break;
        }
        basis.push(w.scaled(1.0 / norm));
    }
    let mut dx = SolutionState::zeros(solver.grid());
    for (i, yi) in y.iter().enumerate() {
        dx.axpy(*yi, &basis[i]);
    }
    Ok(dx)
}

/// One entry of an [`alpha_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub alpha: f64,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub contraction_factor: Option<f64>,
    /// Distance to the no-slip solution, per component.
    pub distance: Option<StateNorm>,
    /// `L^2` norm of the tangential velocity on the bottom.
    pub trace_norm: Option<f64>,
    pub solution_norm: Option<StateNorm>,
    /// Failure message when the solve did not converge.
    pub error: Option<String>,
}

/// Slip solutions along a list of `alpha` compared with the no-slip solution
/// for the same forcing.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub alphas: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    pub reference_norm: StateNorm,
    pub reference_iterations: usize,
}

impl SweepResult {
    fn converged(&self) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(|e| e.error.is_none())
    }

    /// Largest solution norm over the sweep and the no-slip reference.
    pub fn sup_norm(&self) -> f64 {
        self.converged()
            .filter_map(|e| e.solution_norm.map(|n| n.total))
            .fold(self.reference_norm.total, f64::max)
    }

    /// Total distances of the converged entries, in sweep order.
    pub fn distances(&self) -> Vec<f64> {
        self.converged().filter_map(|e| e.distance.map(|d| d.total)).collect()
    }

    pub fn trace_norms(&self) -> Vec<f64> {
        self.converged().filter_map(|e| e.trace_norm).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.error.is_none())
    }

    /// Empirical rate `log(d_i / d_j) / log(alpha_i / alpha_j)` between the
    /// first and last converged entries.
    pub fn distance_rate(&self) -> Option<f64> {
        let c: Vec<_> = self.converged().filter(|e| e.distance.is_some()).collect();
        let (a, b) = (c.first()?, c.last()?);
        if c.len() < 2 {
            return None;
        }
        let (da, db) = (a.distance?.total, b.distance?.total);
        Some((da / db).ln() / (a.alpha / b.alpha).ln())
    }
}

/// Tangential bottom trace in `L^2`.
pub fn bottom_slip_norm(state: &SolutionState) -> f64 {
    let mut trace = state.u.trace(0);
    let grid = state.grid();
    let n = grid.ncomp();
    trace.set_component(n - 1, &vec![ZERO; grid.n_freq()]);
    trace.norm_hs(0.0)
}

/// Solves with every `alpha` and with the no-slip bottom for the same
/// forcing. The slip law must be linear and every `alpha` must lie in
/// `(0, 1)`. Entries run one after another so only one factored solver is
/// held at a time; each solve is parallel over frequencies. A failed entry is
/// recorded and the sweep continues.
pub fn alpha_sweep(
    grid: &Grid,
    forcing: &ForcingSpec,
    params: &PhysicalParams,
    alphas: &[f64],
    config: &SolverConfig,
) -> Result<SweepResult> {
    if !params.slip_law.is_linear() {
        return Err(Error::Unsupported("the slip-limit sweep needs a linear slip law".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::InvalidParams(format!("sweep alphas must lie in (0, 1), got {a}")));
    }
    let s = DEFAULT_REGULARITY;
    let reference = solve_noslip_nonlinear(grid, forcing, params, config)?;
    let entries = alphas
        .iter()
        .map(|&alpha| match solve_nonlinear(grid, forcing, &params.with_alpha(alpha), config) {
            Ok(sol) => SweepEntry {
                alpha,
                iterations: Some(sol.iterations),
                residual: Some(sol.residual()),
                contraction_factor: sol.contraction_factor(),
                distance: Some(sol.state.sub(&reference.state).norm(s)),
                trace_norm: Some(bottom_slip_norm(&sol.state)),
                solution_norm: Some(sol.state.norm(s)),
                error: None,
            },
            Err(e) => SweepEntry {
                alpha,
                iterations: None,
                residual: None,
                contraction_factor: None,
                distance: None,
                trace_norm: None,
                solution_norm: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepResult {
        alphas: alphas.to_vec(),
        entries,
        reference_norm: reference.state.norm(s),
        reference_iterations: reference.iterations,
    })
}

/// Operator-norm estimate of the `l = 0` linear solve at one `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub alpha: f64,
    /// Estimate of `sup ||Upsilon^-1 d||_X / ||d||_Y`.
    pub norm: f64,
    /// Frequency attaining the estimate.
    pub xi: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityProbe {
    pub entries: Vec<ProbeEntry>,
}

impl UniformityProbe {
    /// `max / min` of the estimates.
    pub fn ratio(&self) -> f64 {
        let max = self.entries.iter().map(|e| e.norm).fold(0.0, f64::max);
        let min = self.entries.iter().map(|e| e.norm).fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Data and state coordinates at one frequency for the `l = 0` solve.
struct FrequencyLayout {
    /// `(component, node)` of every enforced momentum entry.
    f_slots: Vec<(usize, usize)>,
    /// Enforced continuity nodes.
    g_nodes: Vec<usize>,
    has_surface: bool,
    n: usize,
    nz: usize,
}

impl FrequencyLayout {
    fn new(grid: &Grid, f: usize) -> Self {
        let n = grid.ncomp();
        let nz = grid.nz();
        let mut f_slots = Vec::new();
        for c in 0..n {
            let range = if c < n - 1 { 1..nz - 1 } else { 0..nz - 1 };
            f_slots.extend(range.map(|j| (c, j)));
        }
        FrequencyLayout { f_slots, g_nodes: (1..nz).collect(), has_surface: !grid.is_zero_freq(f), n, nz }
    }

    fn data_dim(&self) -> usize {
        self.f_slots.len() + self.g_nodes.len() + usize::from(self.has_surface) + self.n
    }

    fn state_dim(&self) -> usize {
        (self.n + 1) * self.nz + usize::from(self.has_surface)
    }
}

/// Gram matrices `(D^j)^T W D^j` of the vertical derivatives.
struct VerticalGrams {
    grams: Vec<DMatrix<f64>>,
}

impl VerticalGrams {
    fn new(grid: &Grid, max_order: usize) -> Self {
        let cheb = grid.cheb();
        let nz = grid.nz();
        let d1 = DMatrix::from_row_slice(nz, nz, cheb.d1());
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(cheb.weights()));
        let mut dj = DMatrix::<f64>::identity(nz, nz);
        let mut grams = Vec::new();
        for j in 0..=max_order {
            if j > 0 {
                dj = &d1 * dj;
            }
            grams.push(dj.transpose() * &w * &dj);
        }
        VerticalGrams { grams }
    }

    /// Gram matrix of the strip norm of regularity `s` at `|xi|^2 = xi2`.
    fn strip(&self, xi2: f64, s: f64) -> DMatrix<f64> {
        let nz = self.grams[0].nrows();
        let mut g = DMatrix::zeros(nz, nz);
        for j in 0..=derivative_orders(s) {
            g += &self.grams[j] * strip_weight(xi2, s, j);
        }
        g
    }
}

fn complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Gram matrix of the data norm on the enforced entries at frequency `f`
/// (without the cell volume).
fn data_gram(grid: &Grid, grams: &VerticalGrams, layout: &FrequencyLayout, f: usize, s: f64) -> DMatrix<f64> {
    let xi2 = grid.xi_norm2(f);
    let dd = layout.data_dim();
    let mut gy = DMatrix::<f64>::zeros(dd, dd);
    let gf = grams.strip(xi2, s);
    for (a, &(ca, ja)) in layout.f_slots.iter().enumerate() {
        for (b, &(cb, jb)) in layout.f_slots.iter().enumerate() {
            if ca == cb {
                gy[(a, b)] = gf[(ja, jb)];
            }
        }
    }
    let off_g = layout.f_slots.len();
    let gg = grams.strip(xi2, s + 1.0);
    for (a, &ja) in layout.g_nodes.iter().enumerate() {
        for (b, &jb) in layout.g_nodes.iter().enumerate() {
            gy[(off_g + a, off_g + b)] = gg[(ja, jb)];
        }
    }
    let mut off = off_g + layout.g_nodes.len();
    if layout.has_surface {
        let h = off;
        gy[(h, h)] += (1.0 + xi2).powf(s + 1.5);
        // Compatibility seminorm of h - ∫ g.
        let mut a = DVector::<f64>::zeros(dd);
        a[h] = 1.0;
        let weights = grid.cheb().weights();
        for (i, &j) in layout.g_nodes.iter().enumerate() {
            a[off_g + i] = -weights[j];
        }
        gy += &a * a.transpose() / xi2;
        off += 1;
    }
    for c in 0..layout.n {
        gy[(off + c, off + c)] = (1.0 + xi2).powf(s + 0.5);
    }
    gy
}

/// Gram matrix of the solution norm at frequency `f`, ordered as `u`
/// (component-major), `p`, then `eta` away from zero frequency.
fn state_gram(grid: &Grid, grams: &VerticalGrams, layout: &FrequencyLayout, f: usize, s: f64) -> DMatrix<f64> {
    let (n, nz) = (layout.n, layout.nz);
    let xi2 = grid.xi_norm2(f);
    let sd = layout.state_dim();
    let mut gx = DMatrix::<f64>::zeros(sd, sd);
    let gu = grams.strip(xi2, s + 2.0);
    for c in 0..n {
        gx.view_mut((c * nz, c * nz), (nz, nz)).copy_from(&gu);
    }
    gx.view_mut((n * nz, n * nz), (nz, nz)).copy_from(&grams.strip(xi2, s + 1.0));
    if layout.has_surface {
        gx[(sd - 1, sd - 1)] = xs_weight(&grid.xi(f)[..grid.dim()], s + 2.5);
    }
    gx
}

impl FrequencyLayout {
    /// Unit data entry `col` as frequency data and top trace.
    fn unit_data(&self, col: usize, value: Complex64) -> (FrequencyData, Complex64) {
        let (n, nz) = (self.n, self.nz);
        let mut fd = FrequencyData::zeros(n, nz);
        let mut h = ZERO;
        let off_g = self.f_slots.len();
        let off_h = off_g + self.g_nodes.len();
        if col < off_g {
            let (c, j) = self.f_slots[col];
            fd.f[c * nz + j] = value;
        } else if col < off_h {
            fd.g[self.g_nodes[col - off_g]] = value;
        } else if self.has_surface && col == off_h {
            h = value;
        } else {
            fd.k[col - off_h - usize::from(self.has_surface)] = value;
        }
        (fd, h)
    }
}

/// The `l = 0` solve at frequency `f` in coordinates where both norms are
/// Euclidean: `L_X^H T L_Y^-H` with `G = L L^H` the Gram matrices.
fn whitened_block(solver: &LinearSolver, grams: &VerticalGrams, f: usize, s: f64) -> Result<DMatrix<Complex64>> {
    let grid = solver.grid();
    let layout = FrequencyLayout::new(grid, f);
    let (dd, sd) = (layout.data_dim(), layout.state_dim());
    let gy = data_gram(grid, grams, &layout, f, s);
    let gx = state_gram(grid, grams, &layout, f, s);

    // Solution operator column by column.
    let mut t = DMatrix::<Complex64>::zeros(sd, dd);
    for col in 0..dd {
        let (fd, h) = layout.unit_data(col, Complex64::new(1.0, 0.0));
        let (sol, e) = solver.solve_frequency(f, &fd, h, DataMode::LZero)?;
        for (i, v) in sol.w.iter().chain(&sol.q).enumerate() {
            t[(i, col)] = *v;
        }
        if layout.has_surface {
            t[(sd - 1, col)] = e;
        }
    }

    let ly = Cholesky::new(complex(&gy)).ok_or_else(|| Error::Unsupported("data Gram matrix not positive".into()))?.l();
    let lx = Cholesky::new(complex(&gx)).ok_or_else(|| Error::Unsupported("state Gram matrix not positive".into()))?.l();
    let right = ly
        .solve_lower_triangular(&t.adjoint())
        .ok_or_else(|| Error::Unsupported("singular data Gram factor".into()))?
        .adjoint();
    Ok(lx.adjoint() * right)
}

/// Frequencies visited by the probe: one of each conjugate pair, no Nyquist.
fn probe_frequencies(grid: &Grid) -> Vec<usize> {
    (0..grid.n_freq()).filter(|&f| !grid.is_nyquist(f) && grid.conj_index(f) >= f).collect()
}

/// Largest singular value of `b` by power iteration on `b^H b`.
fn power_norm(b: &DMatrix<Complex64>, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut v = DVector::from_fn(b.ncols(), |_, _| Complex64::new(uniform(&mut rng), uniform(&mut rng)));
    v /= Complex64::new(v.norm(), 0.0);
    let bh = b.adjoint();
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = &bh * (b * &v);
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        let next = lambda.sqrt();
        v = w / Complex64::new(lambda, 0.0);
        if (next - sigma).abs() <= 1e-12 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

fn probe_with<F>(solver: &LinearSolver, s: f64, block_norm: F) -> Result<(f64, [f64; 2])>
where
    F: Fn(&DMatrix<Complex64>, usize) -> f64 + Sync + Send,
{
    let grid = solver.grid();
    let grams = VerticalGrams::new(grid, derivative_orders(s + 2.0));
    let freqs = probe_frequencies(grid);
    let norms = parallel::try_map_range(freqs.len(), |i| {
        whitened_block(solver, &grams, freqs[i], s).map(|b| block_norm(&b, freqs[i]))
    })?;
    let (i, norm) = norms
        .iter()
        .cloned()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok((norm, grid.xi(freqs[i])))
}

/// Power-iteration estimate of the norm of the `l = 0` solve from the data
/// space to the solution space (regularity `s`).
pub fn solve_norm_estimate(solver: &LinearSolver, s: f64) -> Result<(f64, [f64; 2])> {
    probe_with(solver, s, |b, f| power_norm(b, f as u64))
}

/// Same quantity from a dense singular value decomposition per frequency.
pub fn solve_norm_dense(solver: &LinearSolver, s: f64) -> Result<f64> {
    probe_with(solver, s, |b, _| b.singular_values().max()).map(|r| r.0)
}

/// [`solve_norm_estimate`] for every `alpha` with the slip bottom.
pub fn uniformity_probe(grid: &Grid, params: &PhysicalParams, alphas: &[f64], s: f64) -> Result<UniformityProbe> {
    let entries = alphas
        .iter()
        .map(|&alpha| {
            let solver = LinearSolver::new(grid, &params.with_alpha(alpha), BoundaryMode::Slip)?;
            let (norm, xi) = solve_norm_estimate(&solver, s)?;
            Ok(ProbeEntry { alpha, norm, xi })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniformityProbe { entries })
}
