//! Moving fields between spectral storage and the 3/2-padded physical grid.
//! Strip values are laid out node-major: entry `j * np + p` is node `j`,
//! horizontal point `p`, with `np` padded points per plane.

use crate::parallel;
use crate::spectral::transform::{coeffs_to_padded, padded_to_coeffs};
use crate::spectral::{Grid, StripSpectrum, SurfaceSpectrum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which derivative to take before evaluating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    None,
    /// Horizontal derivative in direction `a < d`.
    Horizontal(usize),
    Vertical,
}

fn horizontal_factor(grid: &Grid, f: usize, a: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * grid.xi(f)[a])
}

/// Component `c` of a strip field (optionally differentiated) on the padded
/// grid.
pub fn strip_to_padded(s: &StripSpectrum, c: usize, deriv: Derivative) -> Vec<f64> {
    let grid = s.grid();
    let nz = grid.nz();
    let profiles: Vec<Vec<Complex64>> = (0..grid.n_freq())
        .map(|f| {
            let p = s.profile(f, c);
            match deriv {
                Derivative::None => p.to_vec(),
                Derivative::Horizontal(a) => {
                    let m = horizontal_factor(grid, f, a);
                    p.iter().map(|v| v * m).collect()
                }
                Derivative::Vertical => grid.cheb().diff(p),
            }
        })
        .collect();
    let planes = parallel::map_range(nz, |j| {
        let plane: Vec<Complex64> = profiles.iter().map(|p| p[j]).collect();
        coeffs_to_padded(grid, &plane)
    });
    planes.concat()
}

/// Inverse of [`strip_to_padded`] for one component: dealiased projection of
/// node-major padded values onto the lattice.
pub fn padded_to_strip_component(grid: &Grid, values: &[f64], out: &mut StripSpectrum, c: usize) {
    let np = grid.n_padded_points();
    let planes = parallel::map_range(grid.nz(), |j| padded_to_coeffs(grid, &values[j * np..(j + 1) * np]));
    for (j, plane) in planes.iter().enumerate() {
        out.set_plane(j, c, plane);
    }
}

/// Component `c` of a surface field (optionally differentiated
/// horizontally) on the padded grid.
pub fn surface_to_padded(s: &SurfaceSpectrum, c: usize, direction: Option<usize>) -> Vec<f64> {
    let grid = s.grid();
    let coeffs: Vec<Complex64> = (0..grid.n_freq())
        .map(|f| match direction {
            None => s.get(f, c),
            Some(a) => s.get(f, c) * horizontal_factor(grid, f, a),
        })
        .collect();
    coeffs_to_padded(grid, &coeffs)
}

/// Dealiased projection of padded surface values onto the lattice.
pub fn padded_to_surface(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    padded_to_coeffs(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_mode() {
        let g = Grid::new(2.0, 1, 8, 10, 1.0).unwrap();
        let mut s = StripSpectrum::zeros(&g, 1);
        // Real field cos(pi x) x_n^2.
        for (j, &x) in g.cheb().nodes().to_vec().iter().enumerate() {
            s.set(1, j, 0, Complex64::new(0.5 * x * x, 0.0));
            s.set(7, j, 0, Complex64::new(0.5 * x * x, 0.0));
        }
        let np = g.n_padded_points();
        let dx = strip_to_padded(&s, 0, Derivative::Horizontal(0));
        let dz = strip_to_padded(&s, 0, Derivative::Vertical);
        for (j, &z) in g.cheb().nodes().iter().enumerate() {
            for p in 0..np {
                let x = g.point(p, np)[0];
                assert!((dx[j * np + p] + PI * (PI * x).sin() * z * z).abs() < 1e-12);
                assert!((dz[j * np + p] - 2.0 * z * (PI * x).cos()).abs() < 1e-12);
            }
        }
        let mut back = StripSpectrum::zeros(&g, 1);
        padded_to_strip_component(&g, &strip_to_padded(&s, 0, Derivative::None), &mut back, 0);
        assert!(back.sub(&s).max_abs() < 1e-14);
    }
}
