//! Free-surface construction and the full linear solve.
//!
//! The flat Stokes problem with data `(f, g, k, l)` is solvable for any data,
//! but its normal trace `u_n(., b)` is then fixed. The compatibility
//! functional `Lambda = h - u_n(., b)` measures the mismatch with a prescribed
//! trace `h`; per frequency it is a quadrature against the adjoint profiles
//! `(V, Q)`:
//!
//! ```text
//! Lambda(xi) = ∫ f.conj V - g conj Q  - k.conj V(b) + h + (1/alpha) l.conj V'(0)
//! ```
//!
//! where `V'` is the tangential part of `V`. This follows from integrating
//! the forward equations against the adjoint profiles; the friction terms
//! cancel because the adjoint uses `beta^T`.
//!
//! The surface `eta = Lambda / rho` then makes the data compatible, and the
//! full linear operator
//!
//! ```text
//! Upsilon(u, p, eta) = ( div S - gamma d_1 u + (grad' eta, 0),
//!                        div u,
//!                        u_n(b) + gamma d_1 eta,
//!                        S e_n(b) + sigma Lap' eta e_n,
//!                        [alpha S e_n + beta u]'(0) )
//! ```
//!
//! is inverted frequency by frequency.

use crate::bvp::{BoundaryMode, FrequencyData, FrequencyOperator, FrequencySolution, PhysicalParams};
use crate::error::{Error, Result};
use crate::parallel;
use crate::sampling::{random_mean_free_surface, random_strip, random_surface, random_velocity};
use crate::spectral::norms::{norm_xs, seminorm_hdot_minus1, SobolevNorm};
use crate::spectral::{Grid, StripSpectrum, SurfaceSpectrum};
use crate::symbols::SymbolTable;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Regularity index used when none is given.
pub const DEFAULT_REGULARITY: f64 = 1.0;

/// Whether the bottom slip data `l` is part of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// `l` arbitrary (the operator `Upsilon`).
    GenericL,
    /// `l = 0` (the operator restricted to homogeneous slip).
    LZero,
}

fn iota(xi: &[f64], a: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * xi[a])
}

/// Data `(f, g, h, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTuple {
    pub f: StripSpectrum,
    pub g: StripSpectrum,
    pub h: SurfaceSpectrum,
    pub k: SurfaceSpectrum,
    pub l: Option<SurfaceSpectrum>,
}

/// Component norms of a [`DataTuple`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataNorm {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    pub l: f64,
    /// `[h - ∫ g]` in the negative homogeneous seminorm.
    pub compat: f64,
    pub total: f64,
}

impl DataTuple {
    pub fn zeros(grid: &Grid, with_l: bool) -> Self {
        let n = grid.ncomp();
        DataTuple {
            f: StripSpectrum::zeros(grid, n),
            g: StripSpectrum::zeros(grid, 1),
            h: SurfaceSpectrum::zeros(grid, 1),
            k: SurfaceSpectrum::zeros(grid, n),
            l: with_l.then(|| SurfaceSpectrum::zeros(grid, n - 1)),
        }
    }

    /// Random real data with `h(0) = ∫ g(0)`, so the compatibility seminorm
    /// is finite.
    pub fn random<R: Rng>(rng: &mut R, grid: &Grid, with_l: bool, bandwidth: f64) -> Self {
        let n = grid.ncomp();
        let f = random_strip(rng, grid, n, bandwidth);
        let g = random_strip(rng, grid, 1, bandwidth);
        let mut h = random_surface(rng, grid, 1, bandwidth);
        let k = random_surface(rng, grid, n, bandwidth);
        let l = with_l.then(|| random_surface(rng, grid, n - 1, bandwidth));
        h.set(0, 0, grid.cheb().integrate(g.profile(0, 0)));
        DataTuple { f, g, h, k, l }
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    /// Data of frequency `f`; missing `l` reads as zero.
    pub fn frequency(&self, f: usize) -> FrequencyData {
        let n = self.k.ncomp();
        FrequencyData {
            f: self.f.freq_slice(f).to_vec(),
            g: self.g.freq_slice(f).to_vec(),
            k: self.k.freq_slice(f).to_vec(),
            l: match &self.l {
                Some(l) => l.freq_slice(f).to_vec(),
                None => vec![ZERO; n - 1],
            },
        }
    }

    fn map2(&self, other: &Self, op: impl Fn(&mut [Complex64], &[Complex64])) -> Self {
        let mut out = self.clone();
        op(out.f.coeffs_mut(), other.f.coeffs());
        op(out.g.coeffs_mut(), other.g.coeffs());
        op(out.h.coeffs_mut(), other.h.coeffs());
        op(out.k.coeffs_mut(), other.k.coeffs());
        match (&mut out.l, &other.l) {
            (Some(a), Some(b)) => op(a.coeffs_mut(), b.coeffs()),
            (Some(a), None) => {
                let zeros = vec![ZERO; a.coeffs().len()];
                op(a.coeffs_mut(), &zeros)
            }
            (None, Some(b)) => {
                let mut a = SurfaceSpectrum::zeros(b.grid(), b.ncomp());
                op(a.coeffs_mut(), b.coeffs());
                out.l = Some(a);
            }
            (None, None) => {}
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x -= y))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.f.scale(a);
        out.g.scale(a);
        out.h.scale(a);
        out.k.scale(a);
        if let Some(l) = &mut out.l {
            l.scale(a);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        [self.f.max_abs(), self.g.max_abs(), self.h.max_abs(), self.k.max_abs()]
            .into_iter()
            .chain(self.l.as_ref().map(|l| l.max_abs()))
            .fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        [self.f.hermitian_defect(), self.g.hermitian_defect(), self.h.hermitian_defect(), self.k.hermitian_defect()]
            .into_iter()
            .chain(self.l.as_ref().map(|l| l.hermitian_defect()))
            .fold(0.0, f64::max)
    }

    /// Zeroes the frequencies where `keep(xi)` is false.
    pub fn filtered<F: Fn(&[f64]) -> bool + Copy>(&self, keep: F) -> Self {
        let mut out = self.clone();
        out.f.filter_in_place(keep);
        out.g.filter_in_place(keep);
        out.h.filter_in_place(keep);
        out.k.filter_in_place(keep);
        if let Some(l) = &mut out.l {
            l.filter_in_place(keep);
        }
        out
    }

    /// Drops `l`.
    pub fn without_l(&self) -> Self {
        DataTuple { l: None, ..self.clone() }
    }

    /// `h - ∫ g` per frequency.
    pub fn compatibility_defect(&self) -> SurfaceSpectrum {
        let grid = self.grid();
        let cheb = grid.cheb();
        let mut out = self.h.clone();
        for f in 0..grid.n_freq() {
            out.set(f, 0, self.h.get(f, 0) - cheb.integrate(self.g.profile(f, 0)));
        }
        out
    }

    /// Norm of the data space with regularity `s`: `f` in `H^s`, `g` in
    /// `H^(s+1)`, `h` in `H^(s+3/2)`, `k` and `l` in `H^(s+1/2)`, plus the
    /// compatibility seminorm. Without `l` this is the norm of the `l = 0`
    /// data space.
    pub fn norm(&self, s: f64) -> DataNorm {
        let f = self.f.norm_hs(s);
        let g = self.g.norm_hs(s + 1.0);
        let h = self.h.norm_hs(s + 1.5);
        let k = self.k.norm_hs(s + 0.5);
        let l = self.l.as_ref().map_or(0.0, |l| l.norm_hs(s + 0.5));
        let compat = seminorm_hdot_minus1(&self.compatibility_defect()).value;
        let total = (f * f + g * g + h * h + k * k + l * l + compat * compat).sqrt();
        DataNorm { f, g, h, k, l, compat, total }
    }

    /// Zeroes the entries that the collocation closure does not enforce:
    /// tangential momentum at both end nodes, normal momentum at the top,
    /// continuity at the bottom and `h` at zero frequency (fixed by the mean
    /// of `g` instead of by the surface).
    pub fn restrict_to_enforced(&mut self) {
        let grid = self.grid().clone();
        let n = grid.ncomp();
        let top = grid.nz() - 1;
        for f in 0..grid.n_freq() {
            for c in 0..n - 1 {
                self.f.set(f, 0, c, ZERO);
                self.f.set(f, top, c, ZERO);
            }
            self.f.set(f, top, n - 1, ZERO);
            self.g.set(f, 0, 0, ZERO);
        }
        self.h.set(0, 0, ZERO);
    }
}

/// Velocity, pressure and surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub u: StripSpectrum,
    pub p: StripSpectrum,
    pub eta: SurfaceSpectrum,
}

/// Component norms of a [`SolutionState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateNorm {
    pub u: f64,
    pub p: f64,
    pub eta: f64,
    pub total: f64,
}

impl SolutionState {
    pub fn zeros(grid: &Grid) -> Self {
        SolutionState {
            u: StripSpectrum::zeros(grid, grid.ncomp()),
            p: StripSpectrum::zeros(grid, 1),
            eta: SurfaceSpectrum::zeros(grid, 1),
        }
    }

    /// Random real state with `u_n(., 0) = 0` and mean-free `eta`.
    pub fn random<R: Rng>(rng: &mut R, grid: &Grid, bandwidth: f64) -> Self {
        let u = random_velocity(rng, grid, bandwidth);
        let p = random_strip(rng, grid, 1, bandwidth);
        let eta = random_mean_free_surface(rng, grid, bandwidth);
        SolutionState { u, p, eta }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// `u` in `H^(s+2)`, `p` in `H^(s+1)`, `eta` in the anisotropic space
    /// of order `s + 5/2`.
    pub fn norm(&self, s: f64) -> StateNorm {
        let u = self.u.norm_hs(s + 2.0);
        let p = self.p.norm_hs(s + 1.0);
        let eta = norm_xs(&self.eta, s + 2.5).total;
        StateNorm { u, p, eta, total: (u * u + p * p + eta * eta).sqrt() }
    }

    pub fn add(&self, other: &Self) -> Self {
        SolutionState { u: self.u.add(&other.u), p: self.p.add(&other.p), eta: self.eta.add(&other.eta) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SolutionState { u: self.u.sub(&other.u), p: self.p.sub(&other.p), eta: self.eta.sub(&other.eta) }
    }

    pub fn scaled(&self, a: f64) -> Self {
        SolutionState { u: self.u.scaled(a), p: self.p.scaled(a), eta: self.eta.scaled(a) }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.u.axpy(a, &other.u);
        self.p.axpy(a, &other.p);
        self.eta.axpy(a, &other.eta);
    }

    /// Real inner product of the coefficient vectors.
    pub fn dot(&self, other: &Self) -> f64 {
        let d = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>();
        d(self.u.coeffs(), other.u.coeffs()) + d(self.p.coeffs(), other.p.coeffs()) + d(self.eta.coeffs(), other.eta.coeffs())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.p.max_abs()).max(self.eta.max_abs())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u.hermitian_defect().max(self.p.hermitian_defect()).max(self.eta.hermitian_defect())
    }

    pub fn filtered<F: Fn(&[f64]) -> bool + Copy>(&self, keep: F) -> Self {
        let mut out = self.clone();
        out.u.filter_in_place(keep);
        out.p.filter_in_place(keep);
        out.eta.filter_in_place(keep);
        out
    }
}

/// Applies the flat Stokes operator and its boundary operators to the
/// profiles `w` (component-major) and `q` at one frequency. `f` and `g` are
/// evaluated at every node.
pub fn apply_stokes_frequency(
    xi: &[f64],
    w: &[Complex64],
    q: &[Complex64],
    params: &PhysicalParams,
    bottom: BoundaryMode,
    cheb: &crate::spectral::Chebyshev,
) -> FrequencyData {
    let n = params.ncomp();
    let nz = cheb.len();
    let top = nz - 1;
    let xi2: f64 = xi[..n - 1].iter().map(|x| x * x).sum();
    let shift = Complex64::new(4.0 * PI * PI * xi2, -2.0 * PI * params.gamma * xi[0]);
    let comp = |c: usize| &w[c * nz..(c + 1) * nz];
    let dw: Vec<Vec<Complex64>> = (0..n).map(|c| cheb.diff(comp(c))).collect();
    let d2w: Vec<Vec<Complex64>> = (0..n).map(|c| cheb.diff(&dw[c])).collect();
    let dq = cheb.diff(q);
    let wn = comp(n - 1);
    let tangential_div: Vec<Complex64> =
        (0..nz).map(|j| (0..n - 1).map(|b| iota(xi, b) * comp(b)[j]).sum()).collect();
    let d_tangential_div = cheb.diff(&tangential_div);

    let mut data = FrequencyData::zeros(n, nz);
    for j in 0..nz {
        let div = tangential_div[j] + dw[n - 1][j];
        for a in 0..n - 1 {
            let ia = iota(xi, a);
            data.f[a * nz + j] = -d2w[a][j] + shift * comp(a)[j] + ia * q[j] - ia * div;
        }
        data.f[(n - 1) * nz + j] =
            -2.0 * d2w[n - 1][j] + shift * wn[j] + dq[j] - d_tangential_div[j];
        data.g[j] = div;
    }
    for a in 0..n - 1 {
        data.k[a] = -(dw[a][top] + iota(xi, a) * wn[top]);
        if bottom.has_slip() {
            let stress = -(dw[a][0] + iota(xi, a) * wn[0]);
            let friction: Complex64 = (0..n).map(|c| params.beta_at(a, c) * comp(c)[0]).sum();
            data.l[a] = params.alpha * stress + friction;
        }
    }
    data.k[n - 1] = q[top] - 2.0 * dw[n - 1][top];
    data
}

/// `Upsilon(state)`. The `l` component is present only for slip bottoms in
/// [`DataMode::GenericL`].
pub fn apply_upsilon(
    state: &SolutionState,
    params: &PhysicalParams,
    bottom: BoundaryMode,
    mode: DataMode,
) -> DataTuple {
    let grid = state.grid();
    let n = grid.ncomp();
    let d = n - 1;
    let nz = grid.nz();
    let with_l = bottom.has_slip() && mode == DataMode::GenericL;
    let per_freq = parallel::map_range(grid.n_freq(), |f| {
        let xi = grid.xi(f);
        let mut fd = apply_stokes_frequency(
            &xi,
            state.u.freq_slice(f),
            state.p.freq_slice(f),
            params,
            bottom,
            grid.cheb(),
        );
        let eta = state.eta.get(f, 0);
        for a in 0..d {
            let ie = iota(&xi, a) * eta;
            fd.f[a * nz..(a + 1) * nz].iter_mut().for_each(|v| *v += ie);
        }
        fd.k[n - 1] -= 4.0 * PI * PI * params.sigma * grid.xi_norm2(f) * eta;
        let h = state.u.get(f, nz - 1, n - 1) + params.gamma * iota(&xi, 0) * eta;
        (fd, h)
    });
    let mut out = DataTuple::zeros(grid, with_l);
    for (f, (fd, h)) in per_freq.into_iter().enumerate() {
        out.f.freq_slice_mut(f).copy_from_slice(&fd.f);
        out.g.freq_slice_mut(f).copy_from_slice(&fd.g);
        out.k.freq_slice_mut(f).copy_from_slice(&fd.k);
        out.h.set(f, 0, h);
        if let Some(l) = &mut out.l {
            l.freq_slice_mut(f).copy_from_slice(&fd.l);
        }
    }
    out
}

/// The overdetermined map `(u, p) -> (f, g, u_n(b), k, l)`: the flat Stokes
/// data together with the normal trace at the top.
pub fn apply_overdetermined(
    u: &StripSpectrum,
    p: &StripSpectrum,
    params: &PhysicalParams,
    bottom: BoundaryMode,
) -> DataTuple {
    let grid = u.grid();
    let state = SolutionState { u: u.clone(), p: p.clone(), eta: SurfaceSpectrum::zeros(grid, 1) };
    apply_upsilon(&state, params, bottom, DataMode::GenericL)
}

/// Result of [`divergence_trace_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceTrace {
    /// `[u_n(., b) - ∫ div u]` in the negative homogeneous seminorm.
    pub seminorm: f64,
    /// `2 pi sqrt(b) ||u||_{L^2}`.
    pub bound: f64,
    /// `seminorm / bound` (zero for `u = 0`).
    pub ratio: f64,
}

/// Compares the trace-divergence mismatch of `u` with the bound
/// `2 pi sqrt(b) ||u||_{L^2}`.
pub fn divergence_trace_check(u: &StripSpectrum) -> DivergenceTrace {
    let grid = u.grid();
    let n = grid.ncomp();
    let cheb = grid.cheb();
    let top = grid.nz() - 1;
    let mut defect = SurfaceSpectrum::zeros(grid, 1);
    for f in 0..grid.n_freq() {
        let xi = grid.xi(f);
        let dn = cheb.diff(u.profile(f, n - 1));
        let div: Vec<Complex64> = (0..grid.nz())
            .map(|j| dn[j] + (0..n - 1).map(|a| iota(&xi, a) * u.get(f, j, a)).sum::<Complex64>())
            .collect();
        defect.set(f, 0, u.get(f, top, n - 1) - cheb.integrate(&div));
    }
    let seminorm = seminorm_hdot_minus1(&defect).value;
    let bound = 2.0 * PI * grid.depth().sqrt() * u.norm_hs(0.0);
    DivergenceTrace { seminorm, bound, ratio: if bound > 0.0 { seminorm / bound } else { 0.0 } }
}

/// Factored forward operators and adjoint symbols for one set of parameters
/// and one bottom condition.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    grid: Grid,
    params: PhysicalParams,
    bottom: BoundaryMode,
    ops: Vec<Option<FrequencyOperator>>,
    symbols: SymbolTable,
}

impl LinearSolver {
    /// `bottom` is [`BoundaryMode::Slip`] or [`BoundaryMode::NoSlip`].
    pub fn new(grid: &Grid, params: &PhysicalParams, bottom: BoundaryMode) -> Result<Self> {
        if bottom.is_adjoint() {
            return Err(Error::Unsupported(format!("forward solver needs a forward mode, got {bottom}")));
        }
        params.validate(grid.dim())?;
        let n = grid.ncomp();
        let ops = parallel::try_map_range(grid.n_freq(), |f| {
            if grid.is_nyquist(f) {
                return Ok(None);
            }
            let xi = grid.xi(f);
            FrequencyOperator::new(&xi[..n - 1], params, bottom, grid.cheb()).map(Some)
        })?;
        let symbols = SymbolTable::build(grid, params, bottom)?;
        Ok(LinearSolver { grid: grid.clone(), params: params.clone(), bottom, ops, symbols })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn bottom(&self) -> BoundaryMode {
        self.bottom
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// Largest condition estimate over the lattice.
    pub fn max_condition(&self) -> f64 {
        self.ops.iter().flatten().map(|op| op.condition()).fold(0.0, f64::max)
    }

    fn uses_l(&self, mode: DataMode) -> bool {
        self.bottom.has_slip() && mode == DataMode::GenericL
    }

    /// Compatibility functional at frequency `f` for the data `fd` with top
    /// trace `h`.
    fn lambda_at(&self, f: usize, fd: &FrequencyData, h: Complex64, use_l: bool) -> Complex64 {
        let grid = &self.grid;
        if grid.is_nyquist(f) {
            return ZERO;
        }
        let n = grid.ncomp();
        let nz = grid.nz();
        let cheb = grid.cheb();
        let v = &self.symbols.v;
        let q = self.symbols.q.profile(f, 0);
        let mut total = h;
        for c in 0..n {
            let vc = v.profile(f, c);
            let fc = &fd.f[c * nz..(c + 1) * nz];
            let prod: Vec<Complex64> = fc.iter().zip(vc).map(|(a, b)| a * b.conj()).collect();
            total += cheb.integrate(&prod);
            total -= fd.k[c] * vc[nz - 1].conj();
        }
        let gq: Vec<Complex64> = fd.g.iter().zip(q).map(|(a, b)| a * b.conj()).collect();
        total -= cheb.integrate(&gq);
        if use_l {
            for a in 0..n - 1 {
                total += fd.l[a] * v.get(f, 0, a).conj() / self.params.alpha;
            }
        }
        total
    }

    /// Compatibility functional by quadrature against the adjoint profiles.
    pub fn compute_lambda(&self, data: &DataTuple, mode: DataMode) -> SurfaceSpectrum {
        let use_l = self.uses_l(mode) && data.l.is_some();
        let values = parallel::map_range(self.grid.n_freq(), |f| {
            self.lambda_at(f, &data.frequency(f), data.h.get(f, 0), use_l)
        });
        SurfaceSpectrum::from_coeffs(&self.grid, 1, values)
    }

    fn eta_at(&self, f: usize, lambda: Complex64) -> Result<Complex64> {
        let grid = &self.grid;
        if grid.is_nyquist(f) || grid.is_zero_freq(f) {
            return Ok(ZERO);
        }
        let rho = self.symbols.rho[f];
        if !(rho.norm() > f64::MIN_POSITIVE) || !rho.is_finite() {
            return Err(Error::VanishingSymbol { xi: grid.xi(f)[..grid.dim()].to_vec() });
        }
        Ok(lambda / rho)
    }

    /// Full solve restricted to frequency `f`: data `fd` with top trace `h`
    /// gives the profiles and the surface coefficient. Agrees with
    /// [`Self::solve_linear_full`] on that frequency.
    pub fn solve_frequency(
        &self,
        f: usize,
        fd: &FrequencyData,
        h: Complex64,
        mode: DataMode,
    ) -> Result<(FrequencySolution, Complex64)> {
        if self.params.gamma == 0.0 {
            return Err(Error::InvalidParams("surface construction needs gamma != 0".into()));
        }
        let grid = &self.grid;
        let n = grid.ncomp();
        let nz = grid.nz();
        let Some(op) = &self.ops[f] else {
            return Ok((FrequencySolution::zeros(n, nz), ZERO));
        };
        let use_l = self.uses_l(mode);
        let e = self.eta_at(f, self.lambda_at(f, fd, h, use_l))?;
        let xi = grid.xi(f);
        let mut modified = fd.clone();
        for a in 0..n - 1 {
            let ie = iota(&xi, a) * e;
            modified.f[a * nz..(a + 1) * nz].iter_mut().for_each(|v| *v -= ie);
        }
        modified.k[n - 1] += 4.0 * PI * PI * self.params.sigma * grid.xi_norm2(f) * e;
        if !use_l {
            modified.l.iter_mut().for_each(|v| *v = ZERO);
        }
        Ok((op.solve(&modified), e))
    }

    /// `h - u_n(., b)` with `(u, p)` the flat solution of `(f, g, k, l)`.
    /// Agrees with [`Self::compute_lambda`] up to discretization error.
    pub fn compute_lambda_by_solve(&self, data: &DataTuple, mode: DataMode) -> SurfaceSpectrum {
        let (u, _) = self.solve_flat(data, mode);
        let n = self.grid.ncomp();
        let top = self.grid.nz() - 1;
        let mut out = data.h.clone();
        for f in 0..self.grid.n_freq() {
            let v = if self.grid.is_nyquist(f) { ZERO } else { data.h.get(f, 0) - u.get(f, top, n - 1) };
            out.set(f, 0, v);
        }
        out
    }

    /// `eta = Lambda / rho` away from zero frequency; zero at `xi = 0` and
    /// on Nyquist modes.
    pub fn construct_eta(&self, data: &DataTuple, mode: DataMode) -> Result<SurfaceSpectrum> {
        if self.params.gamma == 0.0 {
            return Err(Error::InvalidParams("surface construction needs gamma != 0".into()));
        }
        let lambda = self.compute_lambda(data, mode);
        let values = (0..self.grid.n_freq())
            .map(|f| self.eta_at(f, lambda.get(f, 0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SurfaceSpectrum::from_coeffs(&self.grid, 1, values))
    }

    /// Data with the surface contributions removed:
    /// `(f - (grad' eta, 0), g, h - gamma d_1 eta, k - sigma Lap' eta e_n, l)`.
    pub fn modified_data(&self, data: &DataTuple, eta: &SurfaceSpectrum) -> DataTuple {
        let grid = &self.grid;
        let n = grid.ncomp();
        let mut out = data.clone();
        for f in 0..grid.n_freq() {
            let xi = grid.xi(f);
            let e = eta.get(f, 0);
            for a in 0..n - 1 {
                let ie = iota(&xi, a) * e;
                out.f.profile_mut(f, a).iter_mut().for_each(|v| *v -= ie);
            }
            out.h.set(f, 0, data.h.get(f, 0) - self.params.gamma * iota(&xi, 0) * e);
            let kn = data.k.get(f, n - 1) + 4.0 * PI * PI * self.params.sigma * grid.xi_norm2(f) * e;
            out.k.set(f, n - 1, kn);
        }
        out
    }

    /// Flat solve of `(f, g, k, l)`; `h` is ignored.
    pub fn solve_flat(&self, data: &DataTuple, mode: DataMode) -> (StripSpectrum, StripSpectrum) {
        let grid = &self.grid;
        let use_l = self.uses_l(mode);
        let sols = parallel::map_range(grid.n_freq(), |f| {
            self.ops[f].as_ref().map(|op| {
                let mut fd = data.frequency(f);
                if !use_l {
                    fd.l.iter_mut().for_each(|v| *v = ZERO);
                }
                op.solve(&fd)
            })
        });
        let mut u = StripSpectrum::zeros(grid, grid.ncomp());
        let mut p = StripSpectrum::zeros(grid, 1);
        for (f, sol) in sols.into_iter().enumerate() {
            if let Some(sol) = sol {
                u.freq_slice_mut(f).copy_from_slice(&sol.w);
                p.freq_slice_mut(f).copy_from_slice(&sol.q);
            }
        }
        (u, p)
    }

    /// Inverse of [`apply_upsilon`].
    pub fn solve_linear_full(&self, data: &DataTuple, mode: DataMode) -> Result<SolutionState> {
        let eta = self.construct_eta(data, mode)?;
        let modified = self.modified_data(data, &eta);
        let (u, p) = self.solve_flat(&modified, mode);
        Ok(SolutionState { u, p, eta })
    }

    /// [`apply_upsilon`] with this solver's parameters.
    pub fn apply(&self, state: &SolutionState, mode: DataMode) -> DataTuple {
        apply_upsilon(state, &self.params, self.bottom, mode)
    }
}
