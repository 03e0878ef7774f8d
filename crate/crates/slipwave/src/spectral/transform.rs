//! Horizontal FFTs between lattice coefficients and grid samples.
//!
//! Coefficients are Fourier-series coefficients: a field is
//! `f(x) = sum_k c_k exp(2 pi i k.x / L)`, so the constant 1 has `c_0 = 1`.

use super::field::SurfaceSpectrum;
use super::grid::Grid;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct FftPlans {
    pub(crate) padded: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_pad: Arc<dyn Fft<f64>>,
    inv_pad: Arc<dyn Fft<f64>>,
}

impl FftPlans {
    pub(crate) fn new(nx: usize, padded: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPlans {
            padded,
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
            fwd_pad: planner.plan_fft_forward(padded),
            inv_pad: planner.plan_fft_inverse(padded),
        }
    }
}

fn fft_nd(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], m: usize, dim: usize) {
    if dim == 1 {
        plan.process(data);
        return;
    }
    plan.process(data);
    transpose(data, m);
    plan.process(data);
    transpose(data, m);
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Lattice coefficients to samples on the `N_x^d` grid.
pub fn coeffs_to_samples(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    fft_nd(&grid.plans().inv, &mut data, grid.nx(), grid.dim());
    data
}

/// Samples on the `N_x^d` grid to lattice coefficients.
pub fn samples_to_coeffs(grid: &Grid, samples: &[Complex64]) -> Vec<Complex64> {
    let mut data = samples.to_vec();
    fft_nd(&grid.plans().fwd, &mut data, grid.nx(), grid.dim());
    let scale = 1.0 / grid.n_points() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

fn padded_slot(grid: &Grid, f: usize) -> usize {
    let m = grid.padded_nx() as i64;
    let k = grid.wavenumbers(f);
    let p0 = k[0].rem_euclid(m) as usize;
    if grid.dim() == 1 {
        p0
    } else {
        p0 * m as usize + k[1].rem_euclid(m) as usize
    }
}

/// Evaluates a real field on the 3/2-padded grid. The Nyquist coefficient is
/// ignored.
pub fn coeffs_to_padded(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = vec![Complex64::new(0.0, 0.0); grid.n_padded_points()];
    for (f, c) in coeffs.iter().enumerate() {
        if !grid.is_nyquist(f) {
            data[padded_slot(grid, f)] = *c;
        }
    }
    fft_nd(&grid.plans().inv_pad, &mut data, grid.padded_nx(), grid.dim());
    data.iter().map(|v| v.re).collect()
}

/// Transforms real values on the padded grid back to lattice coefficients,
/// discarding everything outside the lattice and zeroing the Nyquist mode.
pub fn padded_to_coeffs(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&grid.plans().fwd_pad, &mut data, grid.padded_nx(), grid.dim());
    let scale = 1.0 / grid.n_padded_points() as f64;
    (0..grid.n_freq())
        .map(|f| {
            if grid.is_nyquist(f) {
                Complex64::new(0.0, 0.0)
            } else {
                data[padded_slot(grid, f)] * scale
            }
        })
        .collect()
}

/// Real samples on the horizontal grid (row-major, `x_j = j L / N_x`) to a
/// scalar surface spectrum.
pub fn forward_transform(grid: &Grid, samples: &[f64]) -> Result<SurfaceSpectrum> {
    if samples.len() != grid.n_points() {
        return Err(Error::SizeMismatch { expected: grid.n_points(), got: samples.len() });
    }
    let data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(SurfaceSpectrum::from_coeffs(grid, 1, samples_to_coeffs(grid, &data)))
}

/// Inverse of [`forward_transform`] for a scalar spectrum (real part).
pub fn inverse_transform(spec: &SurfaceSpectrum) -> Vec<f64> {
    let coeffs: Vec<Complex64> = (0..spec.grid().n_freq()).map(|f| spec.get(f, 0)).collect();
    coeffs_to_samples(spec.grid(), &coeffs).iter().map(|v| v.re).collect()
}
