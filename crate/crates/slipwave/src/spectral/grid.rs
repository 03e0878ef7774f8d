use super::chebyshev::Chebyshev;
use super::transform::FftPlans;
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Horizontal torus `[0, L)^d` times the vertical interval `[0, b]`.
///
/// Frequencies are stored in FFT order per direction: index `i` carries wave
/// number `i` for `i < N_x/2` and `i - N_x` otherwise, so `i = N_x/2` is the
/// Nyquist mode `-N_x/2`. For `d = 2` the flat index is `i1 * N_x + i2`.
/// The physical frequency is `xi = k / L`.
#[derive(Clone)]
pub struct Grid {
    period: f64,
    dim: usize,
    nx: usize,
    nz: usize,
    depth: f64,
    cheb: Arc<Chebyshev>,
    plans: Arc<FftPlans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("period", &self.period)
            .field("dim", &self.dim)
            .field("nx", &self.nx)
            .field("nz", &self.nz)
            .field("depth", &self.depth)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.period == other.period
            && self.dim == other.dim
            && self.nx == other.nx
            && self.nz == other.nz
            && self.depth == other.depth
    }
}

impl Grid {
    pub fn new(period: f64, dim: usize, nx: usize, nz: usize, depth: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidGrid(format!("period L must be positive, got {period}")));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidGrid(format!("depth b must be positive, got {depth}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("horizontal dimension must be 1 or 2, got {dim}")));
        }
        if nx < 8 || nx % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N_x must be even and at least 8, got {nx}")));
        }
        if nz < 8 {
            return Err(Error::InvalidGrid(format!("N_z must be at least 8, got {nz}")));
        }
        let padded = 3 * nx / 2;
        Ok(Grid {
            period,
            dim,
            nx,
            nz,
            depth,
            cheb: Arc::new(Chebyshev::new(nz, depth)),
            plans: Arc::new(FftPlans::new(nx, padded)),
        })
    }

    /// Same horizontal lattice with a different vertical resolution.
    pub fn with_nz(&self, nz: usize) -> Result<Self> {
        Grid::new(self.period, self.dim, self.nx, nz, self.depth)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Horizontal dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of velocity components `n = d + 1`.
    pub fn ncomp(&self) -> usize {
        self.dim + 1
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn cheb(&self) -> &Chebyshev {
        &self.cheb
    }

    pub(crate) fn plans(&self) -> &FftPlans {
        &self.plans
    }

    /// Points per direction on the dealiasing grid.
    pub fn padded_nx(&self) -> usize {
        self.plans.padded
    }

    /// Number of lattice frequencies, `N_x^d`.
    pub fn n_freq(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    /// Number of horizontal sample points, `N_x^d`.
    pub fn n_points(&self) -> usize {
        self.n_freq()
    }

    pub fn n_padded_points(&self) -> usize {
        self.padded_nx().pow(self.dim as u32)
    }

    fn wave(&self, i: usize) -> i64 {
        if i < self.nx / 2 {
            i as i64
        } else {
            i as i64 - self.nx as i64
        }
    }

    /// Integer wave numbers of frequency `f` (unused entries are 0).
    pub fn wavenumbers(&self, f: usize) -> [i64; 2] {
        if self.dim == 1 {
            [self.wave(f), 0]
        } else {
            [self.wave(f / self.nx), self.wave(f % self.nx)]
        }
    }

    /// Physical frequency `xi = k / L` (unused entries are 0).
    pub fn xi(&self, f: usize) -> [f64; 2] {
        let k = self.wavenumbers(f);
        [k[0] as f64 / self.period, k[1] as f64 / self.period]
    }

    pub fn xi_norm2(&self, f: usize) -> f64 {
        let x = self.xi(f);
        x[0] * x[0] + x[1] * x[1]
    }

    pub fn is_nyquist(&self, f: usize) -> bool {
        let half = -(self.nx as i64 / 2);
        let k = self.wavenumbers(f);
        k[..self.dim].iter().any(|&v| v == half)
    }

    pub fn is_zero_freq(&self, f: usize) -> bool {
        let k = self.wavenumbers(f);
        k[0] == 0 && k[1] == 0
    }

    /// Index of `-xi`. Nyquist components map to themselves.
    pub fn conj_index(&self, f: usize) -> usize {
        let neg = |i: usize| (self.nx - i) % self.nx;
        if self.dim == 1 {
            neg(f)
        } else {
            neg(f / self.nx) * self.nx + neg(f % self.nx)
        }
    }

    /// Index of integer wave vector `k`, if it lies on the lattice.
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        let half = self.nx as i64 / 2;
        let idx = |v: i64| -> Option<usize> {
            if v < -half || v >= half {
                None
            } else {
                Some(v.rem_euclid(self.nx as i64) as usize)
            }
        };
        if self.dim == 1 {
            if k[1] != 0 {
                return None;
            }
            idx(k[0])
        } else {
            Some(idx(k[0])? * self.nx + idx(k[1])?)
        }
    }

    /// Horizontal coordinates of sample point `p` on a uniform grid with `m`
    /// points per direction.
    pub fn point(&self, p: usize, m: usize) -> [f64; 2] {
        let h = self.period / m as f64;
        if self.dim == 1 {
            [p as f64 * h, 0.0]
        } else {
            [(p / m) as f64 * h, (p % m) as f64 * h]
        }
    }

    /// Volume of one period cell, `L^d`.
    pub fn cell_volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1.0, 1, 7, 16, 1.0).is_err());
        assert!(Grid::new(1.0, 1, 16, 4, 1.0).is_err());
        assert!(Grid::new(1.0, 3, 16, 16, 1.0).is_err());
        assert!(Grid::new(-1.0, 1, 16, 16, 1.0).is_err());
        assert!(Grid::new(1.0, 1, 16, 16, 0.0).is_err());
    }

    #[test]
    fn lattice_layout() {
        let g = Grid::new(20.0, 1, 8, 8, 1.0).unwrap();
        let ks: Vec<i64> = (0..8).map(|f| g.wavenumbers(f)[0]).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
        assert_eq!(g.conj_index(1), 7);
        assert_eq!(g.conj_index(4), 4);
        assert!((g.xi(1)[0] - 0.05).abs() < 1e-16);
        assert_eq!(g.index_of([-3, 0]), Some(5));
        assert_eq!(g.index_of([4, 0]), None);
    }

    #[test]
    fn lattice_layout_2d() {
        let g = Grid::new(10.0, 2, 8, 8, 1.0).unwrap();
        assert_eq!(g.n_freq(), 64);
        for f in 0..64 {
            let k = g.wavenumbers(f);
            assert_eq!(g.index_of(k), Some(f));
            let c = g.conj_index(f);
            if !g.is_nyquist(f) {
                assert_eq!(g.wavenumbers(c), [-k[0], -k[1]]);
            }
        }
    }
}
