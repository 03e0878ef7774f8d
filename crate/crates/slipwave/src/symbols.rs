//! Surface symbols.
//!
//! For each frequency the adjoint normal-stress problem (speed `-gamma`,
//! friction `beta^T`, top data `psi e_n`) has profiles `V(xi, x_n)`,
//! `Q(xi, x_n)` for `psi = 1`. The normal-stress-to-velocity symbol is
//! `m(xi) = V_n(xi, b)` and the surface symbol is
//! `rho(xi) = 2 pi i gamma xi_1 + (1 + 4 pi^2 |xi|^2 sigma) conj(m(xi))`.
//! Both are Hermitian in `xi`, `Re m < 0` away from zero, and
//! `|m| ~ min(|xi|^2, 1/|xi|)`.

use crate::bvp::{BoundaryMode, FrequencyData, FrequencyOperator, PhysicalParams};
use crate::error::{Error, Result};
use crate::parallel;
use crate::spectral::{Chebyshev, Grid, StripSpectrum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Boundary layers with more than this many e-folds over the depth are
/// solved on a truncated layer below the surface; the neglected part of the
/// profile is below `exp(-DECAY_BUDGET)`.
pub const DECAY_BUDGET: f64 = 40.0;

/// Surface symbol from `m`.
pub fn rho_from_m(xi: &[f64], m: Complex64, params: &PhysicalParams) -> Complex64 {
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    Complex64::new(0.0, 2.0 * PI * params.gamma * xi[0])
        + m.conj() * (1.0 + 4.0 * PI * PI * xi2 * params.sigma)
}

/// Adjoint profiles at one (possibly off-lattice) frequency.
#[derive(Debug, Clone)]
pub struct AdjointProfiles {
    /// Depth of the layer actually resolved (the full depth unless the
    /// boundary layer is thin).
    pub layer: f64,
    pub cheb: Chebyshev,
    /// `n` velocity profiles, component-major, on the layer nodes.
    pub v: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

impl AdjointProfiles {
    pub fn solve(
        xi: &[f64],
        params: &PhysicalParams,
        mode: BoundaryMode,
        nz: usize,
        depth: f64,
    ) -> Result<Self> {
        let xi_abs = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let decay = 2.0 * PI * xi_abs * depth;
        let layer = if decay > DECAY_BUDGET { depth * DECAY_BUDGET / decay } else { depth };
        let cheb = Chebyshev::new(nz, layer);
        let op = FrequencyOperator::new(xi, params, mode.adjoint_of_forward(), &cheb)?;
        let sol = op.solve(&FrequencyData::normal_stress(params.ncomp(), nz, Complex64::new(1.0, 0.0)));
        Ok(AdjointProfiles { layer, cheb, v: sol.w, q: sol.q })
    }

    fn nz(&self) -> usize {
        self.q.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.v[c * self.nz()..(c + 1) * self.nz()]
    }

    /// `m = V_n(b)`.
    pub fn m(&self) -> Complex64 {
        let n = self.v.len() / self.nz();
        self.component(n - 1)[self.nz() - 1]
    }

    /// `∫_0^b |V|^2`.
    pub fn int_v2(&self) -> f64 {
        let n = self.v.len() / self.nz();
        (0..n).map(|c| self.cheb.integrate_abs2(self.component(c))).sum()
    }

    /// `|V(xi, 0)|^2`, or the value at the bottom of a truncated layer.
    pub fn v0_sq(&self) -> f64 {
        let n = self.v.len() / self.nz();
        (0..n).map(|c| self.component(c)[0].norm_sqr()).sum()
    }

    /// `∫_0^b |Q - 1|^2`; below a truncated layer `Q` vanishes to working
    /// precision, so that part contributes its length.
    pub fn int_q_minus1_sq(&self, depth: f64) -> f64 {
        let qm: Vec<Complex64> = self.q.iter().map(|q| q - 1.0).collect();
        self.cheb.integrate_abs2(&qm) + (depth - self.layer)
    }
}

impl BoundaryMode {
    /// Adjoint mode paired with a forward bottom condition.
    pub fn adjoint_of_forward(self) -> BoundaryMode {
        if self.is_adjoint() {
            self
        } else {
            self.adjoint()
        }
    }
}

/// `m(xi)` from the adjoint slip problem, with speed `-params.gamma`.
pub fn compute_m(xi: &[f64], params: &PhysicalParams, grid: &Grid) -> Result<Complex64> {
    Ok(AdjointProfiles::solve(xi, params, BoundaryMode::Adjoint, grid.nz(), grid.depth())?.m())
}

/// `rho(xi)`; see the module docs.
pub fn compute_rho(xi: &[f64], params: &PhysicalParams, grid: &Grid) -> Result<Complex64> {
    Ok(rho_from_m(xi, compute_m(xi, params, grid)?, params))
}

/// One row of the symbol CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRow {
    pub xi: Vec<f64>,
    pub m: Complex64,
    pub rho: Complex64,
    pub int_v2: f64,
    pub v0_sq: f64,
    pub int_q_minus1_sq: f64,
    pub alpha: f64,
}

impl SymbolRow {
    pub fn at(xi: &[f64], params: &PhysicalParams, nz: usize, depth: f64) -> Result<Self> {
        let prof = AdjointProfiles::solve(xi, params, BoundaryMode::Adjoint, nz, depth)?;
        let m = prof.m();
        Ok(SymbolRow {
            xi: xi.to_vec(),
            m,
            rho: rho_from_m(xi, m, params),
            int_v2: prof.int_v2(),
            v0_sq: prof.v0_sq(),
            int_q_minus1_sq: prof.int_q_minus1_sq(depth),
            alpha: params.alpha,
        })
    }

    pub fn xi_abs(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// CSV header for horizontal dimension `d`.
    pub fn header(d: usize) -> Vec<String> {
        let mut h: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
        for s in ["Re_m", "Im_m", "Re_rho", "Im_rho", "intV2", "V0sq", "intQm1sq", "alpha"] {
            h.push(s.to_string());
        }
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = self.xi.clone();
        v.extend([
            self.m.re,
            self.m.im,
            self.rho.re,
            self.rho.im,
            self.int_v2,
            self.v0_sq,
            self.int_q_minus1_sq,
            self.alpha,
        ]);
        v
    }
}

/// Adjoint profiles and symbols on every lattice frequency. Built once and
/// shared read-only.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: Grid,
    params: PhysicalParams,
    mode: BoundaryMode,
    /// `n` components.
    pub v: StripSpectrum,
    pub q: StripSpectrum,
    pub m: Vec<Complex64>,
    pub rho: Vec<Complex64>,
}

impl SymbolTable {
    /// `bottom` is the forward bottom condition (`Slip` or `NoSlip`); the
    /// matching adjoint is solved. Nyquist entries are left zero.
    pub fn build(grid: &Grid, params: &PhysicalParams, bottom: BoundaryMode) -> Result<Self> {
        let n = grid.ncomp();
        let nz = grid.nz();
        let mode = bottom.adjoint_of_forward();
        let psi = FrequencyData::normal_stress(n, nz, Complex64::new(1.0, 0.0));
        let sols = parallel::try_map_range(grid.n_freq(), |f| -> Result<_> {
            if grid.is_nyquist(f) {
                return Ok(None);
            }
            let xi = grid.xi(f);
            let op = FrequencyOperator::new(&xi[..n - 1], params, mode, grid.cheb())?;
            Ok(Some(op.solve(&psi)))
        })?;
        let mut v = StripSpectrum::zeros(grid, n);
        let mut q = StripSpectrum::zeros(grid, 1);
        let mut m = vec![Complex64::new(0.0, 0.0); grid.n_freq()];
        let mut rho = m.clone();
        for (f, sol) in sols.into_iter().enumerate() {
            let Some(sol) = sol else { continue };
            for c in 0..n {
                v.profile_mut(f, c).copy_from_slice(sol.component(c));
            }
            q.profile_mut(f, 0).copy_from_slice(&sol.q);
            m[f] = sol.component(n - 1)[nz - 1];
            let xi = grid.xi(f);
            rho[f] = rho_from_m(&xi[..n - 1], m[f], params);
        }
        Ok(SymbolTable { grid: grid.clone(), params: params.clone(), mode, v, q, m, rho })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// The adjoint mode that was solved.
    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Largest `|m(-xi) - conj m(xi)|` and the same for `rho`.
    pub fn hermitian_defect(&self) -> (f64, f64) {
        let g = &self.grid;
        let mut dm = 0.0f64;
        let mut dr = 0.0f64;
        for f in 0..g.n_freq() {
            if g.is_nyquist(f) {
                continue;
            }
            let h = g.conj_index(f);
            dm = dm.max((self.m[h] - self.m[f].conj()).norm());
            dr = dr.max((self.rho[h] - self.rho[f].conj()).norm());
        }
        (dm, dr)
    }

    /// CSV rows for the lattice (non-Nyquist frequencies).
    pub fn rows(&self) -> Vec<SymbolRow> {
        let g = &self.grid;
        let d = g.dim();
        let n = g.ncomp();
        (0..g.n_freq())
            .filter(|&f| !g.is_nyquist(f))
            .map(|f| {
                let xi = g.xi(f);
                let cheb = g.cheb();
                let int_v2 = (0..n).map(|c| cheb.integrate_abs2(self.v.profile(f, c))).sum();
                let v0_sq = (0..n).map(|c| self.v.get(f, 0, c).norm_sqr()).sum();
                let qm: Vec<Complex64> = self.q.profile(f, 0).iter().map(|q| q - 1.0).collect();
                SymbolRow {
                    xi: xi[..d].to_vec(),
                    m: self.m[f],
                    rho: self.rho[f],
                    int_v2,
                    v0_sq,
                    int_q_minus1_sq: cheb.integrate_abs2(&qm),
                    alpha: self.params.alpha,
                }
            })
            .collect()
    }
}

/// Two-sided constants `lower <= ratio <= upper` fitted over a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FittedBounds {
    pub fn fit<I: IntoIterator<Item = f64>>(ratios: I) -> Self {
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        for r in ratios {
            lower = lower.min(r);
            upper = upper.max(r);
        }
        FittedBounds { lower, upper }
    }

    /// `upper / lower`.
    pub fn spread(&self) -> f64 {
        self.upper / self.lower
    }

    /// Single constant `c` with `1/c <= ratio <= c`.
    pub fn constant(&self) -> f64 {
        self.upper.max(1.0 / self.lower)
    }
}

/// `min(|xi|^2, 1/|xi|)`.
pub fn m_weight(xi_abs: f64) -> f64 {
    (xi_abs * xi_abs).min(1.0 / xi_abs)
}

/// Reference weight for `|rho|^2`: `xi_1^2 + |xi|^4` below the unit ball
/// (`|xi|^2` when `sigma = 0`), `1 + |xi|^2` outside.
pub fn rho_weight(xi: &[f64], sigma: f64) -> f64 {
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    if xi2 >= 1.0 {
        1.0 + xi2
    } else if sigma == 0.0 {
        xi2
    } else {
        xi[0] * xi[0] + xi2 * xi2
    }
}

/// Reference weight for `∫|V|^2`: `min(|xi|^2, |xi|^-2)`.
pub fn v_weight(xi_abs: f64) -> f64 {
    (xi_abs * xi_abs).min(1.0 / (xi_abs * xi_abs))
}

/// Log-spaced sample of `count` magnitudes from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// Symbol rows along the direction `e_1` at the given magnitudes.
pub fn sweep_along_e1(
    magnitudes: &[f64],
    params: &PhysicalParams,
    dim: usize,
    nz: usize,
    depth: f64,
) -> Result<Vec<SymbolRow>> {
    parallel::try_map_range(magnitudes.len(), |i| {
        let mut xi = vec![0.0; dim];
        xi[0] = magnitudes[i];
        SymbolRow::at(&xi, params, nz, depth)
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Result of [`fit_asymptotic_slopes`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// Slope of `log|m|` over the lowest decade of the range.
    pub low_slope: f64,
    /// Slope over the highest decade.
    pub high_slope: f64,
    /// Constants for `|m| / min(|xi|^2, 1/|xi|)` over the whole range.
    pub m_bounds: FittedBounds,
    /// True if `Re m < 0` at every sample.
    pub re_m_negative: bool,
    pub rows: Vec<SymbolRow>,
}

/// Samples `|m|` along `e_1` on `[xi_min, xi_max]` (`per_decade` points per
/// decade) and fits the log-log slopes of both asymptotic branches. The range
/// must reach `1e-2` below and `1e2` above.
pub fn fit_asymptotic_slopes(
    xi_min: f64,
    xi_max: f64,
    per_decade: usize,
    params: &PhysicalParams,
    dim: usize,
    nz: usize,
    depth: f64,
) -> Result<SlopeFit> {
    if !(xi_min > 0.0 && xi_min <= 1e-2 && xi_max >= 1e2) {
        return Err(Error::InsufficientRange(format!(
            "need 0 < xi_min <= 1e-2 and xi_max >= 1e2, got [{xi_min}, {xi_max}]"
        )));
    }
    let per_decade = per_decade.max(3);
    let decades = (xi_max / xi_min).log10();
    let count = (decades * per_decade as f64).round() as usize + 1;
    let mags = log_space(xi_min, xi_max, count);
    let rows = sweep_along_e1(&mags, params, dim, nz, depth)?;
    let branch = |lo: f64, hi: f64| {
        let sel: Vec<&SymbolRow> =
            rows.iter().filter(|r| r.xi_abs() >= lo * (1.0 - 1e-12) && r.xi_abs() <= hi * (1.0 + 1e-12)).collect();
        let x: Vec<f64> = sel.iter().map(|r| r.xi_abs()).collect();
        let y: Vec<f64> = sel.iter().map(|r| r.m.norm()).collect();
        loglog_slope(&x, &y)
    };
    Ok(SlopeFit {
        low_slope: branch(xi_min, 10.0 * xi_min),
        high_slope: branch(xi_max / 10.0, xi_max),
        m_bounds: FittedBounds::fit(rows.iter().map(|r| r.m.norm() / m_weight(r.xi_abs()))),
        re_m_negative: rows.iter().all(|r| r.m.re < 0.0),
        rows,
    })
}

/// Profile diagnostics at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub xi_abs: f64,
    pub int_v2: f64,
    pub v0_sq: f64,
    pub int_q_minus1_sq: f64,
}

/// Constants for `∫|V|^2 <= c_v min(|xi|^2,|xi|^-2)`,
/// `|V(0)|^2 <= c_v0 min(|xi|^2,|xi|^-2)` and `∫|Q-1|^2 <= c_q |xi|^2`
/// (the last on `|xi| < 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBounds {
    pub c_v: f64,
    pub c_v0: f64,
    pub c_q: f64,
}

impl ProfileBounds {
    pub fn fit(reports: &[ProfileReport]) -> Self {
        let mut b = ProfileBounds { c_v: 0.0, c_v0: 0.0, c_q: 0.0 };
        for r in reports {
            let w = v_weight(r.xi_abs);
            b.c_v = b.c_v.max(r.int_v2 / w);
            b.c_v0 = b.c_v0.max(r.v0_sq / w);
            if r.xi_abs < 1.0 {
                b.c_q = b.c_q.max(r.int_q_minus1_sq / (r.xi_abs * r.xi_abs));
            }
        }
        b
    }

    /// True if `report` satisfies all three bounds with relative slack `slack`.
    pub fn admits(&self, r: &ProfileReport, slack: f64) -> bool {
        let w = v_weight(r.xi_abs);
        let ok_v = r.int_v2 <= self.c_v * w * (1.0 + slack);
        let ok_v0 = r.v0_sq <= self.c_v0 * w * (1.0 + slack);
        let ok_q = r.xi_abs >= 1.0 || r.int_q_minus1_sq <= self.c_q * r.xi_abs * r.xi_abs * (1.0 + slack);
        ok_v && ok_v0 && ok_q
    }
}

/// Profile diagnostics at `xi`, checked against `bounds`.
pub fn profile_bounds_check(
    xi: &[f64],
    params: &PhysicalParams,
    grid: &Grid,
    bounds: &ProfileBounds,
) -> Result<(ProfileReport, bool)> {
    let row = SymbolRow::at(xi, params, grid.nz(), grid.depth())?;
    let rep = ProfileReport {
        xi_abs: row.xi_abs(),
        int_v2: row.int_v2,
        v0_sq: row.v0_sq,
        int_q_minus1_sq: row.int_q_minus1_sq,
    };
    let ok = bounds.admits(&rep, 1e-9);
    Ok((rep, ok))
}

/// Fitted symbol constants for one slip parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaConstants {
    pub alpha: f64,
    pub m_bounds: FittedBounds,
    pub rho_bounds: FittedBounds,
}

/// Per-alpha fitted constants and the worst max/min ratio across alphas.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformityTable {
    pub entries: Vec<AlphaConstants>,
    /// Largest ratio across alphas of any of the four fitted constants.
    pub max_ratio: f64,
}

/// Fits the `m` and `rho` constants over `magnitudes` (along `e_1`) for each
/// alpha in `alphas`.
pub fn alpha_uniformity_probe(
    alphas: &[f64],
    magnitudes: &[f64],
    params: &PhysicalParams,
    dim: usize,
    nz: usize,
    depth: f64,
) -> Result<UniformityTable> {
    let mut entries = Vec::new();
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let p = params.with_alpha(alpha);
        let rows = sweep_along_e1(magnitudes, &p, dim, nz, depth)?;
        entries.push(AlphaConstants {
            alpha,
            m_bounds: FittedBounds::fit(rows.iter().map(|r| r.m.norm() / m_weight(r.xi_abs()))),
            rho_bounds: FittedBounds::fit(
                rows.iter().map(|r| r.rho.norm_sqr() / rho_weight(&r.xi, p.sigma)),
            ),
        });
    }
    let ratio = |get: &dyn Fn(&AlphaConstants) -> f64| {
        let v: Vec<f64> = entries.iter().map(get).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let max_ratio = [
        ratio(&|e| e.m_bounds.lower),
        ratio(&|e| e.m_bounds.upper),
        ratio(&|e| e.rho_bounds.lower),
        ratio(&|e| e.rho_bounds.upper),
    ]
    .into_iter()
    .fold(1.0, f64::max);
    Ok(UniformityTable { entries, max_ratio })
}
