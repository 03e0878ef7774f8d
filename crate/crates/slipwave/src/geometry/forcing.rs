//! Analytic forcing recipes and their composition with the flattening map.
//!
//! Four forcings enter the problem: an ambient bulk force on `R^n`, an
//! ambient stress tensor on `R^n` applied at the free surface, a flat bulk
//! force depending only on `x'` (extended constantly in `x_n`) and a flat
//! surface stress depending only on `x'`. Each is a finite sum of recipes that
//! can be evaluated at arbitrary points, so composition with the flattening
//! map is exact.

use super::flattening::FlatteningMaps;
use super::padded::padded_to_strip_component;
use crate::error::{Error, Result};
use crate::spectral::{Grid, StripSpectrum};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One analytic term. Horizontal coordinates are periodic with the grid
/// period; Gaussians use the nearest periodic image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    /// `amplitude exp(-|x - center|^2 / (2 width^2))`.
    Gaussian { amplitude: Vec<f64>, center: Vec<f64>, width: f64 },
    /// `amplitude cos(2 pi k.x' / L + phase)` with integer `k`.
    PlaneWave {
        amplitude: Vec<f64>,
        wavenumber: Vec<i64>,
        #[serde(default)]
        phase: f64,
    },
}

fn nearest_image(dx: f64, period: f64) -> f64 {
    dx - period * (dx / period).round()
}

impl Recipe {
    pub fn amplitude(&self) -> &[f64] {
        match self {
            Recipe::Gaussian { amplitude, .. } | Recipe::PlaneWave { amplitude, .. } => amplitude,
        }
    }

    /// Value at `x`; the first `d` coordinates are horizontal.
    pub fn eval(&self, x: &[f64], d: usize, period: f64) -> Vec<f64> {
        let s = match self {
            Recipe::Gaussian { center, width, .. } => {
                let r2: f64 = x
                    .iter()
                    .zip(center)
                    .enumerate()
                    .map(|(i, (xi, ci))| {
                        let dx = if i < d { nearest_image(xi - ci, period) } else { xi - ci };
                        dx * dx
                    })
                    .sum();
                (-r2 / (2.0 * width * width)).exp()
            }
            Recipe::PlaneWave { wavenumber, phase, .. } => {
                let arg: f64 = wavenumber.iter().zip(x).map(|(k, xi)| *k as f64 * xi).sum::<f64>();
                (2.0 * PI * arg / period + phase).cos()
            }
        };
        self.amplitude().iter().map(|a| a * s).collect()
    }

    fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Recipe::Gaussian { amplitude, .. } | Recipe::PlaneWave { amplitude, .. } => {
                amplitude.iter_mut().for_each(|a| *a *= factor)
            }
        }
        out
    }

    fn validate(&self, what: &str, components: usize, point_dim: usize, d: usize, symmetric: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(format!("{what}: {m}")));
        let amp = self.amplitude();
        if amp.len() != components {
            return bad(format!("amplitude needs {components} entries, got {}", amp.len()));
        }
        if amp.iter().any(|a| !a.is_finite()) {
            return bad("amplitude must be finite".into());
        }
        if symmetric {
            let n = (components as f64).sqrt().round() as usize;
            for i in 0..n {
                for j in 0..i {
                    if amp[i * n + j] != amp[j * n + i] {
                        return bad("stress amplitude must be symmetric".into());
                    }
                }
            }
        }
        match self {
            Recipe::Gaussian { center, width, .. } => {
                if center.len() != point_dim {
                    return bad(format!("center needs {point_dim} coordinates, got {}", center.len()));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return bad(format!("width must be > 0, got {width}"));
                }
            }
            Recipe::PlaneWave { wavenumber, phase, .. } => {
                if wavenumber.len() != d {
                    return bad(format!("wavenumber needs {d} entries, got {}", wavenumber.len()));
                }
                if !phase.is_finite() {
                    return bad("phase must be finite".into());
                }
            }
        }
        Ok(())
    }
}

fn sum_recipes(recipes: &[Recipe], x: &[f64], d: usize, period: f64, components: usize) -> Vec<f64> {
    let mut out = vec![0.0; components];
    for r in recipes {
        for (o, v) in out.iter_mut().zip(r.eval(x, d, period)) {
            *o += v;
        }
    }
    out
}

/// All forcings of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    /// Ambient bulk force, `n` components, points in `R^n`.
    #[serde(default)]
    pub bulk: Vec<Recipe>,
    /// Ambient surface stress, `n x n` symmetric row-major, points in `R^n`.
    #[serde(default)]
    pub surface_stress: Vec<Recipe>,
    /// Flat bulk force, `n` components, points in `R^d`.
    #[serde(default)]
    pub flat_bulk: Vec<Recipe>,
    /// Flat surface stress, `n x n` symmetric row-major, points in `R^d`.
    #[serde(default)]
    pub flat_stress: Vec<Recipe>,
}

impl ForcingSpec {
    pub fn is_empty(&self) -> bool {
        self.bulk.is_empty() && self.surface_stress.is_empty() && self.flat_bulk.is_empty() && self.flat_stress.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim + 1;
        for r in &self.bulk {
            r.validate("forcing.bulk", n, n, dim, false)?;
        }
        for r in &self.surface_stress {
            r.validate("forcing.surface_stress", n * n, n, dim, true)?;
        }
        for r in &self.flat_bulk {
            r.validate("forcing.flat_bulk", n, dim, dim, false)?;
        }
        for r in &self.flat_stress {
            r.validate("forcing.flat_stress", n * n, dim, dim, true)?;
        }
        Ok(())
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[Recipe]| v.iter().map(|r| r.scaled(factor)).collect();
        ForcingSpec {
            bulk: s(&self.bulk),
            surface_stress: s(&self.surface_stress),
            flat_bulk: s(&self.flat_bulk),
            flat_stress: s(&self.flat_stress),
        }
    }

    /// A Gaussian bump force in the middle of the layer together with a
    /// Gaussian normal pressure on the surface, both of size `amplitude`.
    pub fn gaussian_bump(grid: &Grid, amplitude: f64) -> Self {
        let n = grid.ncomp();
        let d = n - 1;
        let mid = 0.5 * grid.period();
        let mut center: Vec<f64> = vec![mid; d];
        center.push(0.5 * grid.depth());
        let mut force = vec![0.0; n];
        force[0] = amplitude;
        force[n - 1] = 0.5 * amplitude;
        let mut top = center.clone();
        top[d] = grid.depth();
        let mut pressure = vec![0.0; n * n];
        pressure[n * n - 1] = amplitude;
        ForcingSpec {
            bulk: vec![Recipe::Gaussian { amplitude: force, center, width: 1.0 }],
            surface_stress: vec![Recipe::Gaussian { amplitude: pressure, center: top, width: 1.0 }],
            ..Default::default()
        }
    }

    /// Ambient bulk force composed with the flattening map plus the flat
    /// bulk force, per component, on the padded grid (node-major).
    pub fn bulk_on_padded(&self, maps: &FlatteningMaps) -> Vec<Vec<f64>> {
        let grid = maps.grid();
        let n = grid.ncomp();
        let d = n - 1;
        let np = maps.np();
        let nz = grid.nz();
        let mut out = vec![vec![0.0; nz * np]; n];
        if self.bulk.is_empty() && self.flat_bulk.is_empty() {
            return out;
        }
        let period = grid.period();
        for p in 0..np {
            let x = grid.point(p, grid.padded_nx());
            let flat = sum_recipes(&self.flat_bulk, &x[..d], d, period, n);
            for j in 0..nz {
                let amb = sum_recipes(&self.bulk, &maps.map_point(j, p), d, period, n);
                for c in 0..n {
                    out[c][j * np + p] = amb[c] + flat[c];
                }
            }
        }
        out
    }

    /// Total surface stress `T_amb(x', b + eta) + T(x')` per padded point,
    /// row-major `n x n`.
    pub fn surface_stress_on_padded(&self, maps: &FlatteningMaps) -> Vec<f64> {
        let grid = maps.grid();
        let n = grid.ncomp();
        let d = n - 1;
        let np = maps.np();
        let top = grid.nz() - 1;
        let mut out = vec![0.0; np * n * n];
        if self.surface_stress.is_empty() && self.flat_stress.is_empty() {
            return out;
        }
        for p in 0..np {
            let x = grid.point(p, grid.padded_nx());
            let amb = sum_recipes(&self.surface_stress, &maps.map_point(top, p), d, grid.period(), n * n);
            let flat = sum_recipes(&self.flat_stress, &x[..d], d, grid.period(), n * n);
            for i in 0..n * n {
                out[p * n * n + i] = amb[i] + flat[i];
            }
        }
        out
    }
}

/// Samples `recipe` at the images `F(x)` of the padded grid points and
/// projects onto the lattice.
pub fn pullback<F>(recipe: F, ncomp: usize, maps: &FlatteningMaps) -> StripSpectrum
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let grid = maps.grid();
    let np = maps.np();
    let nz = grid.nz();
    let mut values = vec![vec![0.0; nz * np]; ncomp];
    for j in 0..nz {
        for p in 0..np {
            let v = recipe(&maps.map_point(j, p));
            for c in 0..ncomp {
                values[c][j * np + p] = v[c];
            }
        }
    }
    let mut out = StripSpectrum::zeros(grid, ncomp);
    for (c, v) in values.iter().enumerate() {
        padded_to_strip_component(grid, v, &mut out, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::flattening::{build_flattening, cutoff};
    use crate::spectral::SurfaceSpectrum;
    use num_complex::Complex64;

    #[test]
    fn flat_pullback_is_plain_sampling() {
        let g = Grid::new(4.0, 1, 16, 10, 1.0).unwrap();
        let maps = build_flattening(&SurfaceSpectrum::zeros(&g, 1), &g).unwrap();
        let r = Recipe::PlaneWave { amplitude: vec![2.0], wavenumber: vec![1], phase: 0.0 };
        let s = pullback(|x| r.eval(x, 1, 4.0), 1, &maps);
        for j in 0..g.nz() {
            assert!((s.get(1, j, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            assert!((s.get(15, j, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let c = pullback(|_| vec![3.0, -1.0], 2, &maps);
        assert!((c.get(0, 4, 0).re - 3.0).abs() < 1e-14 && (c.get(0, 4, 1).re + 1.0).abs() < 1e-14);
        assert!(c.get(2, 4, 0).norm() < 1e-14);
    }

    #[test]
    fn vertical_coordinate_pullback() {
        let g = Grid::new(4.0, 1, 16, 12, 1.0).unwrap();
        let mut eta = SurfaceSpectrum::zeros(&g, 1);
        eta.set(1, 0, Complex64::new(0.05, 0.0));
        eta.set(15, 0, Complex64::new(0.05, 0.0));
        let maps = build_flattening(&eta, &g).unwrap();
        let s = pullback(|x| vec![x[1]], 1, &maps);
        for (j, &z) in g.cheb().nodes().iter().enumerate() {
            assert!((s.get(0, j, 0).re - z).abs() < 1e-14);
            assert!((s.get(1, j, 0).re - 0.05 * cutoff(z, 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_uses_nearest_image() {
        let r = Recipe::Gaussian { amplitude: vec![1.0], center: vec![0.5, 0.0], width: 1.0 };
        let a = r.eval(&[9.5, 0.0], 1, 10.0)[0];
        assert!((a - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_shapes() {
        let g = Grid::new(4.0, 1, 16, 12, 1.0).unwrap();
        assert!(ForcingSpec::gaussian_bump(&g, 1.0).validate(1).is_ok());
        let mut f = ForcingSpec::default();
        f.surface_stress.push(Recipe::Gaussian { amplitude: vec![0.0, 1.0, 2.0, 0.0], center: vec![0.0, 1.0], width: 1.0 });
        assert!(f.validate(1).is_err());
        let f = ForcingSpec { bulk: vec![Recipe::PlaneWave { amplitude: vec![1.0, 0.0], wavenumber: vec![1, 1], phase: 0.0 }], ..Default::default() };
        assert!(f.validate(1).is_err());
    }
}
