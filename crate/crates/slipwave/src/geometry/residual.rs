//! The nonlinear residual on the reference strip.
//!
//! With `G = grad_A u` (`G_ij = A_jk d_k u_i`) and `S_A = p I - (G + G^T)`:
//!
//! ```text
//! f: div_A S_A + (u - gamma e_1).grad_A u + (grad' eta, 0) - f_amb(F) - f_flat
//! g: J div_A u
//! h: u.N + gamma d_1 eta                          at the top, N = (-grad' eta, 1)
//! k: (S_A + sigma H(eta) I - T_amb(F) - T_flat) N at the top
//! l: [A(u) + alpha S_A e_n]'                       at the bottom
//! ```
//!
//! Its derivative at the zero state with zero forcing is the linear operator
//! of [`apply_upsilon`](crate::surface::apply_upsilon). Products are formed on
//! the 3/2-padded grid and projected back onto the lattice.

use super::curvature::mean_curvature;
use super::flattening::build_flattening;
use super::forcing::ForcingSpec;
use super::padded::{padded_to_strip_component, padded_to_surface, strip_to_padded, surface_to_padded, Derivative};
use crate::bvp::{BoundaryMode, PhysicalParams};
use crate::error::{Error, Result};
use crate::spectral::{StripSpectrum, SurfaceSpectrum};
use crate::surface::{DataMode, DataTuple, SolutionState};

fn derivative(k: usize, d: usize) -> Derivative {
    if k < d {
        Derivative::Horizontal(k)
    } else {
        Derivative::Vertical
    }
}

/// Evaluates the residual at `state`. The `l` component is present for slip
/// bottoms in [`DataMode::GenericL`]; [`DataMode::LZero`] requires a linear
/// slip law.
pub fn eval_xi(
    state: &SolutionState,
    forcing: &ForcingSpec,
    params: &PhysicalParams,
    bottom: BoundaryMode,
    mode: DataMode,
) -> Result<DataTuple> {
    if bottom.has_slip() && mode == DataMode::LZero && !params.slip_law.is_linear() {
        return Err(Error::Unsupported("a nonlinear slip law needs generic slip data".into()));
    }
    let grid = state.grid();
    let n = grid.ncomp();
    let d = n - 1;
    let nz = grid.nz();
    let np = grid.n_padded_points();
    let npts = nz * np;
    let top = nz - 1;
    let maps = build_flattening(&state.eta, grid)?;

    let u: Vec<Vec<f64>> = (0..n).map(|i| strip_to_padded(&state.u, i, Derivative::None)).collect();
    let du: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..n).map(|k| strip_to_padded(&state.u, i, derivative(k, d))).collect())
        .collect();
    let p = strip_to_padded(&state.p, 0, Derivative::None);

    let mut stress = vec![vec![0.0; npts]; n * n];
    let mut convection = vec![vec![0.0; npts]; n];
    let mut g_pad = vec![0.0; npts];
    let mut grad_a = vec![0.0; n * n];
    for idx in 0..npts {
        let (j, pt) = (idx / np, idx % np);
        let a = maps.a_at(j, pt);
        for i in 0..n {
            for jj in 0..n {
                grad_a[i * n + jj] = (0..n).map(|k| a[jj * n + k] * du[i][k][idx]).sum();
            }
        }
        let mut div = 0.0;
        for i in 0..n {
            div += grad_a[i * n + i];
            let mut c = -params.gamma * grad_a[i * n];
            for jj in 0..n {
                c += u[jj][idx] * grad_a[i * n + jj];
                let s = -(grad_a[i * n + jj] + grad_a[jj * n + i]) + if i == jj { p[idx] } else { 0.0 };
                stress[i * n + jj][idx] = s;
            }
            convection[i][idx] = c;
        }
        g_pad[idx] = maps.jacobian[idx] * div;
    }

    // div_A S: differentiate the projected stress spectrally.
    let mut stress_spec = StripSpectrum::zeros(grid, n * n);
    for (c, s) in stress.iter().enumerate() {
        padded_to_strip_component(grid, s, &mut stress_spec, c);
    }
    let bulk = forcing.bulk_on_padded(&maps);
    let mut f_pad: Vec<Vec<f64>> = (0..n).map(|i| {
        (0..npts).map(|idx| convection[i][idx] - bulk[i][idx]).collect()
    }).collect();
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let ds = strip_to_padded(&stress_spec, i * n + jj, derivative(k, d));
                for idx in 0..npts {
                    let (j, pt) = (idx / np, idx % np);
                    f_pad[i][idx] += maps.a_at(j, pt)[jj * n + k] * ds[idx];
                }
            }
        }
        if i < d {
            for idx in 0..npts {
                f_pad[i][idx] += maps.grad_eta[(idx % np) * d + i];
            }
        }
    }

    let mut out = DataTuple::zeros(grid, bottom.has_slip() && mode == DataMode::GenericL);
    for (i, v) in f_pad.iter().enumerate() {
        padded_to_strip_component(grid, v, &mut out.f, i);
    }
    padded_to_strip_component(grid, &g_pad, &mut out.g, 0);

    // Top boundary.
    let curvature = surface_to_padded(&mean_curvature(&state.eta), 0, None);
    let d1_eta = surface_to_padded(&state.eta, 0, Some(0));
    let applied = forcing.surface_stress_on_padded(&maps);
    let mut h_pad = vec![0.0; np];
    let mut k_pad = vec![vec![0.0; np]; n];
    for pt in 0..np {
        let idx = top * np + pt;
        let mut normal = vec![1.0; n];
        for a in 0..d {
            normal[a] = -maps.grad_eta[pt * d + a];
        }
        h_pad[pt] = (0..n).map(|i| u[i][idx] * normal[i]).sum::<f64>() + params.gamma * d1_eta[pt];
        for i in 0..n {
            k_pad[i][pt] = (0..n)
                .map(|jj| {
                    let tension = if i == jj { params.sigma * curvature[pt] } else { 0.0 };
                    (stress[i * n + jj][idx] + tension - applied[pt * n * n + i * n + jj]) * normal[jj]
                })
                .sum();
        }
    }
    out.h = SurfaceSpectrum::from_coeffs(grid, 1, padded_to_surface(grid, &h_pad));
    for (i, v) in k_pad.iter().enumerate() {
        out.k.set_component(i, &padded_to_surface(grid, v));
    }

    // Bottom boundary.
    if let Some(l) = &mut out.l {
        let mut w = vec![0.0; n];
        for a in 0..d {
            let mut l_pad = vec![0.0; np];
            for (pt, lv) in l_pad.iter_mut().enumerate() {
                for (c, wc) in w.iter_mut().enumerate() {
                    *wc = u[c][pt];
                }
                *lv = params.slip_law.apply(&params.beta, &w)[a] + params.alpha * stress[a * n + d][pt];
            }
            l.set_component(a, &padded_to_surface(grid, &l_pad));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::slip::SlipLaw;
    use crate::sampling::seeded_rng;
    use crate::spectral::Grid;
    use crate::surface::apply_upsilon;

    fn setup() -> (Grid, PhysicalParams) {
        (Grid::new(10.0, 1, 32, 24, 1.0).unwrap(), PhysicalParams::new(1, 0.1, 1.0, 0.2))
    }

    /// `eta` rescaled to physical amplitude `amp`.
    fn with_height(eta: &SurfaceSpectrum, amp: f64) -> SurfaceSpectrum {
        let top = surface_to_padded(eta, 0, None).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        eta.scaled(amp / top)
    }

    #[test]
    fn zero_state_zero_forcing_is_zero() {
        let (g, p) = setup();
        let r = eval_xi(&SolutionState::zeros(&g), &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::GenericL)
            .unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn derivative_at_zero_is_the_linear_operator() {
        let (g, p) = setup();
        for bottom in [BoundaryMode::Slip, BoundaryMode::NoSlip] {
            let dir = SolutionState::random(&mut seeded_rng(21), &g, 0.5);
            let scale = 1.0 / dir.max_abs();
            let eps = 1e-5 * scale;
            let zero = ForcingSpec::default();
            let plus = eval_xi(&dir.scaled(eps), &zero, &p, bottom, DataMode::GenericL).unwrap();
            let minus = eval_xi(&dir.scaled(-eps), &zero, &p, bottom, DataMode::GenericL).unwrap();
            let fd = plus.sub(&minus).scaled(0.5 / eps);
            let lin = apply_upsilon(&dir, &p, bottom, DataMode::GenericL);
            let e = fd.sub(&lin).norm(1.0).total / lin.norm(1.0).total;
            assert!(e < 1e-6, "{bottom}: {e}");
        }
    }

    #[test]
    fn kinematic_row_without_velocity() {
        let (g, p) = setup();
        let mut st = SolutionState::zeros(&g);
        st.eta = crate::sampling::random_mean_free_surface(&mut seeded_rng(3), &g, 0.5).scaled(0.05);
        let r = eval_xi(&st, &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::GenericL).unwrap();
        for f in 0..g.n_freq() {
            let expect = st.eta.get(f, 0) * num_complex::Complex64::new(0.0, 2.0 * std::f64::consts::PI * g.xi(f)[0]);
            assert!((r.h.get(f, 0) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn bottom_row_matches_linear_slip_rows() {
        // A = I near the bottom, so the slip residual is linear in (u, p)
        // even when eta is not small.
        let (g, p) = setup();
        let mut st = SolutionState::random(&mut seeded_rng(4), &g, 0.5);
        st.eta = with_height(&st.eta, 0.1);
        let r = eval_xi(&st, &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::GenericL).unwrap();
        let flat = SolutionState { eta: SurfaceSpectrum::zeros(&g, 1), ..st.clone() };
        let lin = apply_upsilon(&flat, &p, BoundaryMode::Slip, DataMode::GenericL);
        let diff = r.l.as_ref().unwrap().sub(lin.l.as_ref().unwrap()).max_abs();
        assert!(diff < 1e-12 * lin.max_abs(), "{diff}");
    }

    #[test]
    fn nonlinear_law_rejected_with_zero_slip_data() {
        let (g, mut p) = setup();
        p.slip_law = SlipLaw::Cubic { coefficient: 1.0, theta: 1.0, delta: 1.0 };
        let e = eval_xi(&SolutionState::zeros(&g), &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::LZero);
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }

    #[test]
    fn compatibility_defect_of_residual_vanishes_under_refinement() {
        // h - ∫ g has no mean in the continuum: the Piola identity makes the
        // mean of J div_A u equal to the mean flux u.N at the top. Discretely
        // the cutoff is only twice differentiable, so the vertical quadrature
        // converges algebraically.
        let p = PhysicalParams::new(1, 0.1, 1.0, 0.2);
        let defect = |nz: usize| {
            let g = Grid::new(10.0, 1, 32, nz, 1.0).unwrap();
            let mut st = SolutionState::random(&mut seeded_rng(5), &g, 0.5);
            st.eta = with_height(&st.eta, 0.05);
            let r = eval_xi(&st, &ForcingSpec::default(), &p, BoundaryMode::Slip, DataMode::GenericL).unwrap();
            assert!(r.norm(1.0).compat.is_finite());
            r.compatibility_defect().get(0, 0).norm() / r.max_abs()
        };
        let (coarse, fine) = (defect(24), defect(48));
        assert!(coarse < 1e-3, "{coarse}");
        assert!(fine < 0.25 * coarse, "{coarse} {fine}");
    }
}
