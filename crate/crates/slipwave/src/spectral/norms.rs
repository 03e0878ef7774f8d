//! Discrete Sobolev norms.
//!
//! All norms are lattice sums weighted by the cell volume `L^d`, so a field
//! with coefficients `c_k` has `||f||_{L^2}^2 = L^d sum |c_k|^2` (Parseval on
//! the torus). Horizontal weights are `(1 + |xi|^2)^s`; strip norms add
//! vertical derivatives up to order `ceil(s)` with weight
//! `(1 + |xi|^2)^(s - j)` on the `j`-th derivative.

use super::chebyshev::Chebyshev;
use super::field::{StripSpectrum, SurfaceSpectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Vertical derivative orders used by a strip norm of regularity `s`.
pub fn derivative_orders(s: f64) -> usize {
    s.max(0.0).ceil() as usize
}

/// Weight of the `j`-th vertical derivative at `|xi|^2 = xi2`.
pub fn strip_weight(xi2: f64, s: f64, j: usize) -> f64 {
    (1.0 + xi2).powf((s - j as f64).max(0.0))
}

/// Contribution of one vertical profile to the squared strip `H^s` norm
/// (without the cell volume).
pub fn profile_hs2(cheb: &Chebyshev, profile: &[Complex64], xi2: f64, s: f64) -> f64 {
    let mut total = 0.0;
    let mut p = profile.to_vec();
    for j in 0..=derivative_orders(s) {
        if j > 0 {
            p = cheb.diff(&p);
        }
        total += strip_weight(xi2, s, j) * cheb.integrate_abs2(&p);
    }
    total
}

pub trait SobolevNorm {
    /// Discrete `H^s` norm.
    fn norm_hs(&self, s: f64) -> f64;
}

impl SobolevNorm for SurfaceSpectrum {
    fn norm_hs(&self, s: f64) -> f64 {
        let g = self.grid();
        let mut total = 0.0;
        for f in 0..g.n_freq() {
            let w = (1.0 + g.xi_norm2(f)).powf(s);
            total += w * self.freq_slice(f).iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        (g.cell_volume() * total).sqrt()
    }
}

impl SobolevNorm for StripSpectrum {
    fn norm_hs(&self, s: f64) -> f64 {
        let g = self.grid();
        let cheb = g.cheb();
        let mut total = 0.0;
        for f in 0..g.n_freq() {
            let xi2 = g.xi_norm2(f);
            for c in 0..self.ncomp() {
                let p = self.profile(f, c);
                if p.iter().all(|v| v.norm_sqr() == 0.0) {
                    continue;
                }
                total += profile_hs2(cheb, p, xi2, s);
            }
        }
        (g.cell_volume() * total).sqrt()
    }
}

/// Free-function form of [`SobolevNorm::norm_hs`].
pub fn norm_hs<T: SobolevNorm + ?Sized>(field: &T, s: f64) -> f64 {
    field.norm_hs(s)
}

/// Result of [`seminorm_hdot_minus1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seminorm {
    pub value: f64,
    /// Largest `|c_0|` over components when the zero mode is nonzero. The
    /// seminorm is then that of the mean-free part.
    pub incompatible_mean: Option<f64>,
}

/// `[g]_{H^-1} = (L^d sum_{xi != 0} |xi|^-2 |c(xi)|^2)^(1/2)`.
pub fn seminorm_hdot_minus1(g: &SurfaceSpectrum) -> Seminorm {
    let grid = g.grid();
    let mut total = 0.0;
    let mut mean = 0.0f64;
    for f in 0..grid.n_freq() {
        let a2: f64 = g.freq_slice(f).iter().map(|c| c.norm_sqr()).sum();
        if grid.is_zero_freq(f) {
            mean = mean.max(g.freq_slice(f).iter().map(|c| c.norm()).fold(0.0, f64::max));
        } else {
            total += a2 / grid.xi_norm2(f);
        }
    }
    Seminorm {
        value: (grid.cell_volume() * total).sqrt(),
        incompatible_mean: if mean > 0.0 { Some(mean) } else { None },
    }
}

/// Weight of the anisotropic surface space at frequency `xi`.
pub fn xs_weight(xi: &[f64], s: f64) -> f64 {
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    if xi2 == 0.0 {
        0.0
    } else if xi2 < 1.0 {
        (xi[0] * xi[0] + xi2 * xi2) / xi2
    } else {
        (1.0 + xi2).powf(s)
    }
}

/// Anisotropic surface norm split into its `|xi| < 1` and `|xi| >= 1` parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsNorm {
    pub total: f64,
    pub low: f64,
    pub high: f64,
}

/// Norm with weight `(xi_1^2 + |xi|^4)/|xi|^2` inside the unit ball and
/// `(1 + |xi|^2)^s` outside. The zero mode carries no weight (surfaces are
/// stored mean-free).
pub fn norm_xs(eta: &SurfaceSpectrum, s: f64) -> XsNorm {
    let g = eta.grid();
    let d = g.dim();
    let (mut low, mut high) = (0.0, 0.0);
    for f in 0..g.n_freq() {
        let xi = g.xi(f);
        let a2: f64 = eta.freq_slice(f).iter().map(|c| c.norm_sqr()).sum();
        let w = xs_weight(&xi[..d], s) * a2;
        if g.xi_norm2(f) < 1.0 {
            low += w;
        } else {
            high += w;
        }
    }
    let v = g.cell_volume();
    XsNorm { total: (v * (low + high)).sqrt(), low: (v * low).sqrt(), high: (v * high).sqrt() }
}

/// `||u||_{H^1} / (||Du||^2 + ||u(.,0)||^2)^(1/2)` with `Du = grad u + grad u^T`.
pub fn korn_ratio(u: &StripSpectrum) -> Result<f64> {
    let g = u.grid();
    let n = g.ncomp();
    if u.ncomp() != n {
        return Err(Error::SizeMismatch { expected: n, got: u.ncomp() });
    }
    let cheb = g.cheb();
    let mut sym = 0.0;
    let mut trace = 0.0;
    for f in 0..g.n_freq() {
        let xi = g.xi(f);
        let derivs: Vec<Vec<Vec<Complex64>>> = (0..n)
            .map(|c| {
                let p = u.profile(f, c);
                (0..n)
                    .map(|k| {
                        if k == n - 1 {
                            cheb.diff(p)
                        } else {
                            let m = Complex64::new(0.0, 2.0 * PI * xi[k]);
                            p.iter().map(|v| v * m).collect()
                        }
                    })
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                let e: Vec<Complex64> =
                    (0..g.nz()).map(|q| derivs[j][i][q] + derivs[i][j][q]).collect();
                sym += cheb.integrate_abs2(&e);
            }
            trace += u.get(f, 0, i).norm_sqr();
        }
    }
    let den = (g.cell_volume() * (sym + trace)).sqrt();
    if den == 0.0 {
        return Err(Error::InvalidParams("Korn ratio of the zero field".into()));
    }
    Ok(u.norm_hs(1.0) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::Grid;

    fn grid() -> Grid {
        Grid::new(20.0, 1, 16, 12, 1.0).unwrap()
    }

    #[test]
    fn zero_field_norms_vanish() {
        let g = grid();
        assert_eq!(SurfaceSpectrum::zeros(&g, 1).norm_hs(2.0), 0.0);
        assert_eq!(StripSpectrum::zeros(&g, 2).norm_hs(2.5), 0.0);
        assert_eq!(seminorm_hdot_minus1(&SurfaceSpectrum::zeros(&g, 1)).value, 0.0);
        assert_eq!(norm_xs(&SurfaceSpectrum::zeros(&g, 1), 2.0).total, 0.0);
    }

    #[test]
    fn single_mode_weights() {
        let g = grid();
        let f = g.index_of([5, 0]).unwrap();
        let mut s = SurfaceSpectrum::zeros(&g, 1);
        s.set(f, 0, Complex64::new(1.0, 0.0));
        let xi2 = g.xi_norm2(f);
        let vol = g.cell_volume().sqrt();
        let expect = vol * (1.0 + xi2).powf(1.5);
        assert!((s.norm_hs(3.0) - expect).abs() < 1e-13 * expect);
        let semi = seminorm_hdot_minus1(&s);
        assert!((semi.value - vol / xi2.sqrt()).abs() < 1e-13);
        assert!(semi.incompatible_mean.is_none());
    }

    #[test]
    fn xs_high_branch_matches_hs() {
        let g = Grid::new(2.0, 1, 16, 12, 1.0).unwrap();
        let f = g.index_of([-3, 0]).unwrap();
        assert!(g.xi_norm2(f) >= 1.0);
        let mut s = SurfaceSpectrum::zeros(&g, 1);
        s.set(f, 0, Complex64::new(0.0, 1.0));
        let x = norm_xs(&s, 2.0);
        assert!((x.total - s.norm_hs(2.0)).abs() < 1e-12 * x.total);
        assert_eq!(x.low, 0.0);
    }

    #[test]
    fn mean_reported_as_incompatible() {
        let g = grid();
        let mut s = SurfaceSpectrum::zeros(&g, 1);
        s.set(0, 0, Complex64::new(2.0, 0.0));
        s.set(3, 0, Complex64::new(1.0, 0.0));
        let semi = seminorm_hdot_minus1(&s);
        assert_eq!(semi.incompatible_mean, Some(2.0));
        let expect = (g.cell_volume() / g.xi_norm2(3)).sqrt();
        assert!((semi.value - expect).abs() < 1e-13);
    }

    #[test]
    fn strip_norm_scales_linearly() {
        let g = grid();
        let mut u = StripSpectrum::zeros(&g, 2);
        for (i, c) in u.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let a = u.norm_hs(2.0);
        assert!((u.scaled(-3.0).norm_hs(2.0) - 3.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn korn_rigid_translation() {
        let g = grid();
        let mut u = StripSpectrum::zeros(&g, 2);
        for j in 0..g.nz() {
            u.set(0, j, 0, Complex64::new(1.0, 0.0));
        }
        let r = korn_ratio(&u).unwrap();
        assert!((r - g.depth().sqrt()).abs() < 1e-13);
        assert!(korn_ratio(&StripSpectrum::zeros(&g, 2)).is_err());
    }

    #[test]
    fn korn_pure_shear() {
        // u = (x_n, 0): Du has entries 1 off the diagonal, so |Du|^2 = 2 and
        // the trace vanishes. ||u||_{H^1}^2 = L (b^3/3 + b).
        let g = grid();
        let mut u = StripSpectrum::zeros(&g, 2);
        for (j, x) in g.cheb().nodes().iter().enumerate() {
            u.set(0, j, 0, Complex64::new(*x, 0.0));
        }
        let b = g.depth();
        let l = g.period();
        let expect = (l * (b.powi(3) / 3.0 + b)).sqrt() / (l * 2.0 * b).sqrt();
        assert!((korn_ratio(&u).unwrap() - expect).abs() < 1e-13);
    }
}
