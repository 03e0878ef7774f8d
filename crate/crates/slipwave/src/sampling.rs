//! Reproducible random fields.
//!
//! The generator is ChaCha8 keyed by the seed: the 32-byte key holds the seed
//! as little-endian `u64` in bytes `0..8` and zeros elsewhere. Uniform draws
//! are `2 u - 1` with `u = rng.random::<f64>()`, i.e. values in `[-1, 1)`.
//!
//! Fields are band-limited so that every test problem is resolved:
//! frequency `xi` (in index order, Nyquist skipped) gets the envelope
//! `exp(-|xi|^2 / (2 w^2))`, and each component profile is a Chebyshev series
//! of degree [`PROFILE_DEGREE`] in `t = 2 x_n / b - 1` whose coefficients are
//! drawn as `(re, im)` pairs, lowest degree first. The result is made Hermitian
//! by averaging each `(xi, -xi)` pair.

use crate::spectral::{Grid, StripSpectrum, SurfaceSpectrum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Degree of the random vertical profiles.
pub const PROFILE_DEGREE: usize = 6;

/// Default envelope width in frequency units.
pub const DEFAULT_BANDWIDTH: f64 = 0.5;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in `[-1, 1)`.
pub fn uniform<R: Rng>(rng: &mut R) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re = uniform(rng);
    Complex64::new(re, uniform(rng))
}

fn envelope(grid: &Grid, f: usize, bandwidth: f64) -> f64 {
    (-grid.xi_norm2(f) / (2.0 * bandwidth * bandwidth)).exp()
}

/// Chebyshev series with the given coefficients, evaluated at the nodes.
fn chebyshev_series(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let b = grid.depth();
    grid.cheb()
        .nodes()
        .iter()
        .map(|&x| {
            let theta = (2.0 * x / b - 1.0).clamp(-1.0, 1.0).acos();
            coeffs.iter().enumerate().map(|(k, c)| c * (k as f64 * theta).cos()).sum()
        })
        .collect()
}

/// Random real strip field with `ncomp` components.
pub fn random_strip<R: Rng>(rng: &mut R, grid: &Grid, ncomp: usize, bandwidth: f64) -> StripSpectrum {
    let mut out = StripSpectrum::zeros(grid, ncomp);
    for f in 0..grid.n_freq() {
        if grid.is_nyquist(f) {
            continue;
        }
        let env = envelope(grid, f, bandwidth);
        for c in 0..ncomp {
            let coeffs: Vec<Complex64> = (0..=PROFILE_DEGREE).map(|_| complex(rng) * env).collect();
            out.profile_mut(f, c).copy_from_slice(&chebyshev_series(grid, &coeffs));
        }
    }
    out.symmetrize();
    out
}

/// Random real surface field with `ncomp` components.
pub fn random_surface<R: Rng>(rng: &mut R, grid: &Grid, ncomp: usize, bandwidth: f64) -> SurfaceSpectrum {
    let mut out = SurfaceSpectrum::zeros(grid, ncomp);
    for f in 0..grid.n_freq() {
        if grid.is_nyquist(f) {
            continue;
        }
        let env = envelope(grid, f, bandwidth);
        for c in 0..ncomp {
            out.set(f, c, complex(rng) * env);
        }
    }
    out.symmetrize();
    out
}

/// Random velocity with `u_n(., 0) = 0`: the normal profiles are multiplied
/// by `x_n / b`.
pub fn random_velocity<R: Rng>(rng: &mut R, grid: &Grid, bandwidth: f64) -> StripSpectrum {
    let n = grid.ncomp();
    let mut u = random_strip(rng, grid, n, bandwidth);
    let ramp: Vec<f64> = grid.cheb().nodes().iter().map(|x| x / grid.depth()).collect();
    for f in 0..grid.n_freq() {
        for (v, r) in u.profile_mut(f, n - 1).iter_mut().zip(&ramp) {
            *v *= r;
        }
    }
    u
}

/// Random mean-free surface.
pub fn random_mean_free_surface<R: Rng>(rng: &mut R, grid: &Grid, bandwidth: f64) -> SurfaceSpectrum {
    let mut eta = random_surface(rng, grid, 1, bandwidth);
    eta.set(0, 0, Complex64::new(0.0, 0.0));
    eta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_field() {
        let g = Grid::new(20.0, 1, 16, 12, 1.0).unwrap();
        let a = random_strip(&mut seeded_rng(7), &g, 2, 0.5);
        let b = random_strip(&mut seeded_rng(7), &g, 2, 0.5);
        let c = random_strip(&mut seeded_rng(8), &g, 2, 0.5);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fields_are_real_and_skip_nyquist() {
        let g = Grid::new(10.0, 2, 8, 10, 1.0).unwrap();
        let mut rng = seeded_rng(1);
        let u = random_velocity(&mut rng, &g, 0.5);
        assert_eq!(u.hermitian_defect(), 0.0);
        for f in 0..g.n_freq() {
            if g.is_nyquist(f) {
                assert!(u.freq_slice(f).iter().all(|c| c.norm() == 0.0));
            }
            assert_eq!(u.get(f, 0, 2).norm(), 0.0);
        }
        let eta = random_mean_free_surface(&mut rng, &g, 0.5);
        assert_eq!(eta.get(0, 0).norm(), 0.0);
    }

    #[test]
    fn uniform_range() {
        let mut rng = seeded_rng(0);
        for _ in 0..1000 {
            let u = uniform(&mut rng);
            assert!((-1.0..1.0).contains(&u));
        }
    }
}
