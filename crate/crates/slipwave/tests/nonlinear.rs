//! Response of the nonlinear solver to the size of the forcing and of the
//! slip parameter.

use slipwave::bvp::{BoundaryMode, PhysicalParams};
use slipwave::geometry::{eval_xi, ForcingSpec};
use slipwave::newton::{solve_noslip_nonlinear, solve_nonlinear, SolverConfig};
use slipwave::sampling::seeded_rng;
use slipwave::spectral::Grid;
use slipwave::surface::{DataMode, DataTuple, LinearSolver};
use slipwave::symbols::loglog_slope;

fn grid() -> Grid {
    Grid::new(20.0, 1, 64, 24, 1.0).unwrap()
}

fn params() -> PhysicalParams {
    PhysicalParams::new(1, 0.1, 1.0, 0.1)
}

#[test]
fn small_forcing_gives_linear_response() {
    let g = grid();
    let p = params();
    let solver = LinearSolver::new(&g, &p, BoundaryMode::Slip).unwrap();
    let amps = [1e-5, 1e-4, 1e-3, 1e-2];
    let mut norms = Vec::new();
    let mut gaps = Vec::new();
    for &a in &amps {
        let forcing = ForcingSpec::gaussian_bump(&g, a);
        let sol = solve_nonlinear(&g, &forcing, &p, &SolverConfig::default()).unwrap();
        // The linear response solves Upsilon x = -Xi(0).
        let zero = slipwave::surface::SolutionState::zeros(&g);
        let rhs = eval_xi(&zero, &forcing, &p, BoundaryMode::Slip, DataMode::GenericL).unwrap().scaled(-1.0);
        let lin = solver.solve_linear_full(&rhs, DataMode::GenericL).unwrap();
        norms.push(sol.state.norm(1.0).total);
        gaps.push(sol.state.sub(&lin).norm(1.0).total);
    }
    let slope = loglog_slope(&amps, &norms);
    assert!((slope - 1.0).abs() <= 0.05, "{slope}");
    // The deviation from the linear response is quadratic in the amplitude.
    let quad = loglog_slope(&amps, &gaps);
    assert!((quad - 2.0).abs() <= 0.1, "{quad} {gaps:?}");
}

#[test]
fn residual_of_linear_solution_is_second_order() {
    let g = grid();
    let p = params();
    let solver = LinearSolver::new(&g, &p, BoundaryMode::Slip).unwrap();
    let d = DataTuple::random(&mut seeded_rng(9), &g, true, 0.5);
    let eps = [1e-4, 1e-3, 1e-2];
    let mut rem = Vec::new();
    for &e in &eps {
        let x = solver.solve_linear_full(&d.scaled(e), DataMode::GenericL).unwrap();
        let mut r = eval_xi(&x, &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::GenericL)
            .unwrap()
            .sub(&solver.apply(&x, DataMode::GenericL));
        r.restrict_to_enforced();
        rem.push(r.norm(1.0).total);
    }
    let slope = loglog_slope(&eps, &rem);
    assert!((slope - 2.0).abs() <= 0.1, "{slope} {rem:?}");
}

#[test]
fn halving_alpha_approaches_noslip() {
    let g = grid();
    let p = params();
    let cfg = SolverConfig::default();
    let forcing = ForcingSpec::gaussian_bump(&g, 1e-3);
    let reference = solve_noslip_nonlinear(&g, &forcing, &p, &cfg).unwrap();
    let noslip_iters = reference.iterations;
    let mut last = f64::INFINITY;
    let mut alpha = 0.5;
    while alpha > 1e-3 {
        let sol = solve_nonlinear(&g, &forcing, &p.with_alpha(alpha), &cfg).unwrap();
        assert!(sol.iterations.abs_diff(noslip_iters) <= 2);
        let d = sol.state.sub(&reference.state).norm(1.0).total;
        assert!(d <= last + 10.0 * cfg.tol, "{alpha}: {d} after {last}");
        last = d;
        alpha /= 2.0;
    }
}
