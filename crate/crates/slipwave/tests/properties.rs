//! Structural invariants over random seeds, grids and cutoffs.

use proptest::prelude::*;
use slipwave::bvp::{BoundaryMode, PhysicalParams};
use slipwave::geometry::{eval_xi, ForcingSpec};
use slipwave::sampling::{random_mean_free_surface, random_surface, seeded_rng, uniform};
use slipwave::spectral::transform::{coeffs_to_samples, samples_to_coeffs};
use slipwave::spectral::{forward_transform, inverse_transform, norm_xs, Grid, SobolevNorm};
use slipwave::surface::{apply_overdetermined, apply_upsilon, DataMode, DataTuple, LinearSolver, SolutionState};
use slipwave::Complex64;
use std::sync::OnceLock;

fn grid() -> Grid {
    Grid::new(12.0, 1, 16, 12, 1.0).unwrap()
}

fn params() -> PhysicalParams {
    PhysicalParams::new(1, 0.1, 1.0, 0.3)
}

fn solver() -> &'static LinearSolver {
    static SOLVER: OnceLock<LinearSolver> = OnceLock::new();
    SOLVER.get_or_init(|| LinearSolver::new(&grid(), &params(), BoundaryMode::Slip).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    a / b.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transform_roundtrip(seed in any::<u64>(), dim in 1usize..=2, nx in prop::sample::select(vec![8usize, 10, 16])) {
        let g = Grid::new(3.0, dim, nx, 8, 1.0).unwrap();
        let mut rng = seeded_rng(seed);
        let samples: Vec<Complex64> = (0..g.n_points()).map(|_| Complex64::new(uniform(&mut rng), uniform(&mut rng))).collect();
        let back = coeffs_to_samples(&g, &samples_to_coeffs(&g, &samples));
        let err = back.iter().zip(&samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13, "{}", err);

        let real: Vec<f64> = samples.iter().map(|c| c.re).collect();
        let spec = forward_transform(&g, &real).unwrap();
        let back = inverse_transform(&spec);
        let err = back.iter().zip(&real).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13, "{}", err);
        // Parseval with the cell-volume measure.
        let quad = (real.iter().map(|v| v * v).sum::<f64>() * g.cell_volume() / g.n_points() as f64).sqrt();
        prop_assert!((spec.norm_hs(0.0) - quad).abs() < 1e-12 * quad);
    }

    #[test]
    fn surface_space_dominated_by_sobolev_norm(seed in any::<u64>(), s in 0.0f64..4.0) {
        let g = Grid::new(20.0, 2, 8, 8, 1.0).unwrap();
        let eta = random_mean_free_surface(&mut seeded_rng(seed), &g, 0.5);
        // (xi_1^2 + |xi|^4)/|xi|^2 <= 1 + |xi|^2 <= (1 + |xi|^2)^max(s, 1).
        prop_assert!(norm_xs(&eta, s).total <= eta.norm_hs(s.max(1.0)) * (1.0 + 1e-12));
    }

    #[test]
    fn solve_is_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let g = grid();
        let mut rng = seeded_rng(seed);
        let d1 = DataTuple::random(&mut rng, &g, true, 0.5);
        let d2 = DataTuple::random(&mut rng, &g, true, 0.5);
        let s = solver();
        let lhs = s.solve_linear_full(&d1.scaled(a).add(&d2), DataMode::GenericL).unwrap();
        let mut rhs = s.solve_linear_full(&d2, DataMode::GenericL).unwrap();
        rhs.axpy(a, &s.solve_linear_full(&d1, DataMode::GenericL).unwrap());
        let e = rel(lhs.sub(&rhs).norm(1.0).total, rhs.norm(1.0).total);
        prop_assert!(e < 1e-12, "{}", e);
    }

    #[test]
    fn real_fields_stay_real(seed in any::<u64>()) {
        let g = grid();
        let mut rng = seeded_rng(seed);
        let d = DataTuple::random(&mut rng, &g, true, 0.5);
        let s = solver();
        let st = s.solve_linear_full(&d, DataMode::GenericL).unwrap();
        prop_assert!(st.hermitian_defect() <= 1e-14 * st.max_abs());
        let back = apply_upsilon(&st, &params(), BoundaryMode::Slip, DataMode::GenericL);
        prop_assert!(back.hermitian_defect() <= 1e-14 * back.max_abs());
        let lam = s.compute_lambda(&d, DataMode::GenericL);
        prop_assert!(lam.hermitian_defect() <= 1e-14 * lam.max_abs());
        let mut st = SolutionState::random(&mut rng, &g, 0.5);
        st.eta = st.eta.scaled(0.02 / st.eta.max_abs());
        let r = eval_xi(&st, &ForcingSpec::gaussian_bump(&g, 0.1), &params(), BoundaryMode::Slip, DataMode::GenericL).unwrap();
        prop_assert!(r.hermitian_defect() <= 1e-13 * r.max_abs());
    }

    #[test]
    fn filters_commute_with_solve_and_lambda(seed in any::<u64>(), cut in 0.0f64..0.8) {
        let g = grid();
        let keep = move |xi: &[f64]| xi[0].abs() <= cut;
        let d = DataTuple::random(&mut seeded_rng(seed), &g, true, 0.5);
        let s = solver();
        let a = s.solve_linear_full(&d.filtered(keep), DataMode::GenericL).unwrap();
        let b = s.solve_linear_full(&d, DataMode::GenericL).unwrap().filtered(keep);
        prop_assert_eq!(a, b);
        let mut la = s.compute_lambda(&d, DataMode::GenericL);
        la.filter_in_place(keep);
        prop_assert_eq!(la, s.compute_lambda(&d.filtered(keep), DataMode::GenericL));
        // Idempotent.
        prop_assert_eq!(d.filtered(keep).filtered(keep), d.filtered(keep));
    }

    #[test]
    fn lambda_vanishes_on_overdetermined_data(seed in any::<u64>()) {
        let g = grid();
        let st = SolutionState::random(&mut seeded_rng(seed), &g, 0.5);
        let d = apply_overdetermined(&st.u, &st.p, &params(), BoundaryMode::Slip);
        let lam = solver().compute_lambda(&d, DataMode::GenericL);
        let scale = st.u.norm_hs(3.0) + st.p.norm_hs(2.0);
        prop_assert!(lam.norm_hs(0.0) <= 1e-8 * scale);
    }

    #[test]
    fn surface_fields_are_hermitian(seed in any::<u64>(), dim in 1usize..=2) {
        let g = Grid::new(5.0, dim, 8, 8, 1.0).unwrap();
        let s = random_surface(&mut seeded_rng(seed), &g, 2, 0.5);
        prop_assert_eq!(s.hermitian_defect(), 0.0);
    }
}
