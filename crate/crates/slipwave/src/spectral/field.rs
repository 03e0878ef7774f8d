//! Spectral field containers.

use super::grid::Grid;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients over the frequency lattice, `ncomp` components per
/// frequency, stored as `coeffs[f * ncomp + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpectrum {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

/// Coefficients over (frequency, component, Chebyshev node), stored as
/// `coeffs[(f * ncomp + c) * nz + j]` so each vertical profile is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct StripSpectrum {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

macro_rules! common_ops {
    ($t:ty) => {
        impl $t {
            pub fn grid(&self) -> &Grid {
                &self.grid
            }

            pub fn ncomp(&self) -> usize {
                self.ncomp
            }

            pub fn coeffs(&self) -> &[Complex64] {
                &self.coeffs
            }

            pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
                &mut self.coeffs
            }

            pub fn is_zero(&self) -> bool {
                self.coeffs.iter().all(|c| *c == ZERO)
            }

            pub fn max_abs(&self) -> f64 {
                self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }

            pub fn scale(&mut self, a: f64) {
                self.coeffs.iter_mut().for_each(|c| *c *= a);
            }

            pub fn scaled(&self, a: f64) -> Self {
                let mut out = self.clone();
                out.scale(a);
                out
            }

            /// `self += a * other`.
            pub fn axpy(&mut self, a: f64, other: &Self) {
                assert_eq!(self.coeffs.len(), other.coeffs.len(), "field shape mismatch");
                self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(x, y)| *x += y * a);
            }

            pub fn sub(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.axpy(-1.0, other);
                out
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.axpy(1.0, other);
                out
            }

            /// Number of coefficients stored per frequency.
            pub fn per_freq(&self) -> usize {
                self.coeffs.len() / self.grid.n_freq()
            }

            pub fn freq_slice(&self, f: usize) -> &[Complex64] {
                let m = self.per_freq();
                &self.coeffs[f * m..(f + 1) * m]
            }

            pub fn freq_slice_mut(&mut self, f: usize) -> &mut [Complex64] {
                let m = self.per_freq();
                &mut self.coeffs[f * m..(f + 1) * m]
            }

            /// Zeroes every frequency where `keep(xi)` is false.
            pub fn filter_in_place<F: Fn(&[f64]) -> bool>(&mut self, keep: F) {
                let d = self.grid.dim();
                for f in 0..self.grid.n_freq() {
                    let xi = self.grid.xi(f);
                    if !keep(&xi[..d]) {
                        self.freq_slice_mut(f).iter_mut().for_each(|c| *c = ZERO);
                    }
                }
            }

            /// Largest `|c(-xi) - conj c(xi)|` over non-Nyquist frequencies;
            /// zero for spectra of real fields.
            pub fn hermitian_defect(&self) -> f64 {
                let mut worst = 0.0f64;
                for f in 0..self.grid.n_freq() {
                    if self.grid.is_nyquist(f) {
                        continue;
                    }
                    let g = self.grid.conj_index(f);
                    for (a, b) in self.freq_slice(f).iter().zip(self.freq_slice(g)) {
                        worst = worst.max((a.conj() - b).norm());
                    }
                }
                worst
            }

            /// Replaces each coefficient pair by its Hermitian average, making
            /// the represented field exactly real. Nyquist modes are zeroed.
            pub fn symmetrize(&mut self) {
                for f in 0..self.grid.n_freq() {
                    if self.grid.is_nyquist(f) {
                        self.freq_slice_mut(f).iter_mut().for_each(|c| *c = ZERO);
                        continue;
                    }
                    let g = self.grid.conj_index(f);
                    if g < f {
                        continue;
                    }
                    let m = self.per_freq();
                    for i in 0..m {
                        let a = self.coeffs[f * m + i];
                        let b = self.coeffs[g * m + i];
                        let avg = (a + b.conj()) * 0.5;
                        self.coeffs[f * m + i] = avg;
                        self.coeffs[g * m + i] = avg.conj();
                    }
                }
            }
        }
    };
}

common_ops!(SurfaceSpectrum);
common_ops!(StripSpectrum);

/// Frequency filter: returns a copy with coefficients outside the set zeroed.
pub trait FrequencyFilter: Sized + Clone {
    fn filtered<F: Fn(&[f64]) -> bool>(&self, keep: F) -> Self;
}

impl FrequencyFilter for SurfaceSpectrum {
    fn filtered<F: Fn(&[f64]) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        out.filter_in_place(keep);
        out
    }
}

impl FrequencyFilter for StripSpectrum {
    fn filtered<F: Fn(&[f64]) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        out.filter_in_place(keep);
        out
    }
}

/// Free-function form of [`FrequencyFilter::filtered`].
pub fn frequency_filter<T: FrequencyFilter, F: Fn(&[f64]) -> bool>(field: &T, keep: F) -> T {
    field.filtered(keep)
}

impl SurfaceSpectrum {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        SurfaceSpectrum { grid: grid.clone(), ncomp, coeffs: vec![ZERO; grid.n_freq() * ncomp] }
    }

    pub fn from_coeffs(grid: &Grid, ncomp: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n_freq() * ncomp, "coefficient count");
        SurfaceSpectrum { grid: grid.clone(), ncomp, coeffs }
    }

    pub fn get(&self, f: usize, c: usize) -> Complex64 {
        self.coeffs[f * self.ncomp + c]
    }

    pub fn set(&mut self, f: usize, c: usize, v: Complex64) {
        self.coeffs[f * self.ncomp + c] = v;
    }

    /// All frequencies of one component.
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        (0..self.grid.n_freq()).map(|f| self.get(f, c)).collect()
    }

    pub fn set_component(&mut self, c: usize, values: &[Complex64]) {
        for (f, v) in values.iter().enumerate() {
            self.set(f, c, *v);
        }
    }
}

impl StripSpectrum {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        StripSpectrum {
            grid: grid.clone(),
            ncomp,
            coeffs: vec![ZERO; grid.n_freq() * ncomp * grid.nz()],
        }
    }

    pub fn from_coeffs(grid: &Grid, ncomp: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n_freq() * ncomp * grid.nz(), "coefficient count");
        StripSpectrum { grid: grid.clone(), ncomp, coeffs }
    }

    fn offset(&self, f: usize, c: usize) -> usize {
        (f * self.ncomp + c) * self.grid.nz()
    }

    pub fn get(&self, f: usize, node: usize, c: usize) -> Complex64 {
        self.coeffs[self.offset(f, c) + node]
    }

    pub fn set(&mut self, f: usize, node: usize, c: usize, v: Complex64) {
        let o = self.offset(f, c);
        self.coeffs[o + node] = v;
    }

    /// Vertical profile of component `c` at frequency `f`.
    pub fn profile(&self, f: usize, c: usize) -> &[Complex64] {
        let o = self.offset(f, c);
        &self.coeffs[o..o + self.grid.nz()]
    }

    pub fn profile_mut(&mut self, f: usize, c: usize) -> &mut [Complex64] {
        let o = self.offset(f, c);
        let nz = self.grid.nz();
        &mut self.coeffs[o..o + nz]
    }

    /// All frequencies of component `c` at one node.
    pub fn plane(&self, node: usize, c: usize) -> Vec<Complex64> {
        (0..self.grid.n_freq()).map(|f| self.get(f, node, c)).collect()
    }

    pub fn set_plane(&mut self, node: usize, c: usize, values: &[Complex64]) {
        for (f, v) in values.iter().enumerate() {
            self.set(f, node, c, *v);
        }
    }

    /// Values at one node as a surface spectrum with the same components.
    pub fn trace(&self, node: usize) -> SurfaceSpectrum {
        let mut out = SurfaceSpectrum::zeros(&self.grid, self.ncomp);
        for f in 0..self.grid.n_freq() {
            for c in 0..self.ncomp {
                out.set(f, c, self.get(f, node, c));
            }
        }
        out
    }

    /// Selects a subset of components.
    pub fn components(&self, comps: &[usize]) -> StripSpectrum {
        let mut out = StripSpectrum::zeros(&self.grid, comps.len());
        for f in 0..self.grid.n_freq() {
            for (i, &c) in comps.iter().enumerate() {
                out.profile_mut(f, i).copy_from_slice(self.profile(f, c));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(20.0, 1, 8, 8, 1.0).unwrap()
    }

    #[test]
    fn filter_all_is_identity_and_idempotent() {
        let g = grid();
        let mut s = SurfaceSpectrum::zeros(&g, 2);
        for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new(i as f64, -(i as f64));
        }
        assert_eq!(frequency_filter(&s, |_| true), s);
        let once = s.filtered(|xi| xi[0] > 0.0);
        assert_eq!(once.filtered(|xi| xi[0] > 0.0), once);
    }

    #[test]
    fn filter_zero_frequency_kills_cosine() {
        let g = grid();
        let mut s = StripSpectrum::zeros(&g, 1);
        s.set(1, 3, 0, Complex64::new(0.5, 0.0));
        s.set(7, 3, 0, Complex64::new(0.5, 0.0));
        assert!(s.filtered(|xi| xi[0] == 0.0).is_zero());
    }

    #[test]
    fn symmetrize_gives_hermitian() {
        let g = grid();
        let mut s = StripSpectrum::zeros(&g, 2);
        for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new((i as f64).sin(), (i as f64).cos());
        }
        assert!(s.hermitian_defect() > 0.1);
        s.symmetrize();
        assert_eq!(s.hermitian_defect(), 0.0);
    }
}
