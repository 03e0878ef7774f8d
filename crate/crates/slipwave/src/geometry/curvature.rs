//! Mean curvature `H(eta) = div' (grad' eta / sqrt(1 + |grad' eta|^2))`.

use super::padded::{padded_to_surface, surface_to_padded};
use crate::spectral::SurfaceSpectrum;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Mean curvature operator; the quotient is formed on the padded grid.
pub fn mean_curvature(eta: &SurfaceSpectrum) -> SurfaceSpectrum {
    let grid = eta.grid();
    let d = grid.dim();
    let grads: Vec<Vec<f64>> = (0..d).map(|a| surface_to_padded(eta, 0, Some(a))).collect();
    let np = grid.n_padded_points();
    let inv_len: Vec<f64> = (0..np)
        .map(|p| 1.0 / (1.0 + grads.iter().map(|g| g[p] * g[p]).sum::<f64>()).sqrt())
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n_freq()];
    for (a, g) in grads.iter().enumerate() {
        let q: Vec<f64> = g.iter().zip(&inv_len).map(|(v, s)| v * s).collect();
        for (f, c) in padded_to_surface(grid, &q).into_iter().enumerate() {
            out[f] += Complex64::new(0.0, 2.0 * PI * grid.xi(f)[a]) * c;
        }
    }
    SurfaceSpectrum::from_coeffs(grid, 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::padded::surface_to_padded;
    use crate::spectral::Grid;

    fn cosine(grid: &Grid, eps: f64) -> SurfaceSpectrum {
        let mut eta = SurfaceSpectrum::zeros(grid, 1);
        eta.set(1, 0, Complex64::new(eps / 2.0, 0.0));
        eta.set(grid.nx() - 1, 0, Complex64::new(eps / 2.0, 0.0));
        eta
    }

    #[test]
    fn flat_surface_has_no_curvature() {
        let g = Grid::new(3.0, 2, 8, 8, 1.0).unwrap();
        assert_eq!(mean_curvature(&SurfaceSpectrum::zeros(&g, 1)).max_abs(), 0.0);
    }

    #[test]
    fn small_amplitude_expansion_is_cubic() {
        let g = Grid::new(6.0, 1, 64, 8, 1.0).unwrap();
        let k2 = (2.0 * PI / 6.0).powi(2);
        let defect = |eps: f64| {
            let h = mean_curvature(&cosine(&g, eps));
            let lin = cosine(&g, eps).scaled(-k2);
            h.sub(&lin).max_abs()
        };
        let (a, b) = (defect(0.1), defect(0.05));
        let rate = (a / b).log2();
        assert!((rate - 3.0).abs() < 0.05, "{rate}");
    }

    #[test]
    fn matches_closed_form_in_one_dimension() {
        let g = Grid::new(2.0 * PI, 1, 64, 8, 1.0).unwrap();
        let eps = 0.3;
        let h = surface_to_padded(&mean_curvature(&cosine(&g, eps)), 0, None);
        let np = g.n_padded_points();
        for p in 0..np {
            let x = g.point(p, g.padded_nx())[0];
            let d1 = -eps * x.sin();
            let d2 = -eps * x.cos();
            let exact = d2 / (1.0 + d1 * d1).powf(1.5);
            assert!((h[p] - exact).abs() < 1e-10, "{} {}", h[p], exact);
        }
    }
}
