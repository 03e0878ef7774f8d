//! Per-frequency two-point boundary-value problems.
//!
//! After a horizontal Fourier transform the linear traveling-wave Stokes
//! system with stress `S(p, u) = p I - (grad u + grad u^T)` becomes, at each
//! frequency `xi`, an ODE system in `x_n` for the velocity profile `w` and
//! pressure profile `q`:
//!
//! ```text
//! momentum     div S - gamma d_1 u = f
//! continuity   div u = g
//! top          S e_n = k
//! bottom       [alpha S e_n + beta u]' = l,  u_n = 0     (slip)
//!              u = 0                                    (no-slip)
//! ```
//!
//! The ODEs are collocated at the Chebyshev nodes. The unknown vector stores
//! `w_c` at `c * N + j` and `q` at `n * N + j`. Row closure: the tangential
//! momentum rows at both end nodes carry the tangential boundary conditions,
//! the normal momentum row at the top node carries the normal stress, and the
//! continuity row at the bottom node carries `w_n(0) = 0`. Every other
//! collocation row is kept, which pins both the pressure constant and its
//! derivative without spurious modes.

use crate::error::{Error, Result};
use crate::geometry::slip::SlipLaw;
use crate::spectral::Chebyshev;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Condition estimates above this are reported as failures.
pub const MAX_CONDITION: f64 = 1e13;

/// Physical parameters with viscosity and gravity normalized to one. The
/// depth lives on the [`Grid`](crate::spectral::Grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Surface tension coefficient, `>= 0`.
    pub sigma: f64,
    /// Wave speed.
    pub gamma: f64,
    /// Slip parameter, `> 0`.
    pub alpha: f64,
    /// `n x n` slip matrix, row-major.
    pub beta: Vec<f64>,
    /// Bottom friction law; its linearization at zero is `beta`.
    pub slip_law: SlipLaw,
}

impl PhysicalParams {
    /// Identity friction, linear law.
    pub fn new(dim: usize, sigma: f64, gamma: f64, alpha: f64) -> Self {
        let n = dim + 1;
        let mut beta = vec![0.0; n * n];
        for i in 0..n {
            beta[i * n + i] = 1.0;
        }
        PhysicalParams { sigma, gamma, alpha, beta, slip_law: SlipLaw::Linear }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        PhysicalParams { alpha, ..self.clone() }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        PhysicalParams { gamma, ..self.clone() }
    }

    /// Number of velocity components implied by `beta`.
    pub fn ncomp(&self) -> usize {
        (self.beta.len() as f64).sqrt().round() as usize
    }

    pub fn beta_at(&self, i: usize, j: usize) -> f64 {
        self.beta[i * self.ncomp() + j]
    }

    /// Smallest eigenvalue of the symmetric part of `beta`.
    pub fn beta_coercivity(&self) -> f64 {
        let n = self.ncomp();
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.beta_at(i, j) + self.beta_at(j, i)));
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks the constraints for horizontal dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim + 1;
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.beta.len() != n * n {
            return bad(format!("beta must be {n}x{n} for d = {dim}, got {} entries", self.beta.len()));
        }
        if self.beta.iter().any(|v| !v.is_finite()) {
            return bad("beta has non-finite entries".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if self.sigma == 0.0 && dim != 1 {
            return bad("sigma = 0 is only supported for d = 1 (two-dimensional flow, n = 2)".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be finite and > 0, got {}", self.alpha));
        }
        if !self.gamma.is_finite() {
            return bad("gamma must be finite".into());
        }
        let theta = self.beta_coercivity();
        if theta <= 0.0 {
            return bad(format!(
                "symmetric part of beta must be positive definite (smallest eigenvalue {theta:.3e})"
            ));
        }
        self.slip_law.validate()?;
        Ok(())
    }
}

/// Which bottom condition and which sign conventions to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Navier slip with `(alpha, beta, gamma)`.
    Slip,
    /// `u = 0` at the bottom.
    NoSlip,
    /// Slip with `beta^T` and speed `-gamma`, the adjoint of `Slip`.
    Adjoint,
    /// No-slip with speed `-gamma`, the adjoint of `NoSlip`.
    NoSlipAdjoint,
}

impl BoundaryMode {
    pub fn is_adjoint(self) -> bool {
        matches!(self, BoundaryMode::Adjoint | BoundaryMode::NoSlipAdjoint)
    }

    pub fn has_slip(self) -> bool {
        matches!(self, BoundaryMode::Slip | BoundaryMode::Adjoint)
    }

    /// The adjoint partner of a forward mode (and back).
    pub fn adjoint(self) -> BoundaryMode {
        match self {
            BoundaryMode::Slip => BoundaryMode::Adjoint,
            BoundaryMode::Adjoint => BoundaryMode::Slip,
            BoundaryMode::NoSlip => BoundaryMode::NoSlipAdjoint,
            BoundaryMode::NoSlipAdjoint => BoundaryMode::NoSlip,
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryMode::Slip => "slip",
            BoundaryMode::NoSlip => "noslip",
            BoundaryMode::Adjoint => "adjoint",
            BoundaryMode::NoSlipAdjoint => "noslip-adjoint",
        };
        f.write_str(s)
    }
}

/// Data of one frequency: interior profiles and boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyData {
    /// Momentum forcing, `n` profiles of length `N` (component-major).
    pub f: Vec<Complex64>,
    /// Divergence profile.
    pub g: Vec<Complex64>,
    /// Top stress, `n` values.
    pub k: Vec<Complex64>,
    /// Bottom slip data, `n - 1` values (ignored for no-slip).
    pub l: Vec<Complex64>,
}

impl FrequencyData {
    pub fn zeros(n: usize, nz: usize) -> Self {
        FrequencyData {
            f: vec![ZERO; n * nz],
            g: vec![ZERO; nz],
            k: vec![ZERO; n],
            l: vec![ZERO; n - 1],
        }
    }

    /// Unit normal stress `psi` at the top and nothing else.
    pub fn normal_stress(n: usize, nz: usize, psi: Complex64) -> Self {
        let mut d = FrequencyData::zeros(n, nz);
        d.k[n - 1] = psi;
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.g)
            .chain(&self.k)
            .chain(&self.l)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Velocity and pressure profiles at the Chebyshev nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySolution {
    pub ncomp: usize,
    /// `n` profiles, component-major.
    pub w: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

impl FrequencySolution {
    pub fn zeros(n: usize, nz: usize) -> Self {
        FrequencySolution { ncomp: n, w: vec![ZERO; n * nz], q: vec![ZERO; nz] }
    }

    pub fn nz(&self) -> usize {
        self.q.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let nz = self.nz();
        &self.w[c * nz..(c + 1) * nz]
    }

    fn from_vector(n: usize, nz: usize, x: &[Complex64]) -> Self {
        FrequencySolution { ncomp: n, w: x[..n * nz].to_vec(), q: x[n * nz..].to_vec() }
    }

    fn to_vector(&self) -> Vec<Complex64> {
        self.w.iter().chain(&self.q).cloned().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().chain(&self.q).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Coefficients entering the assembly after applying the mode conventions.
struct Coefficients {
    n: usize,
    /// `2 pi i xi_a` for the tangential directions.
    iota: Vec<Complex64>,
    /// `4 pi^2 |xi|^2 - 2 pi i gamma xi_1`.
    diag: Complex64,
    alpha: f64,
    beta: Vec<f64>,
    slip: bool,
}

impl Coefficients {
    fn new(xi: &[f64], params: &PhysicalParams, mode: BoundaryMode) -> Self {
        let n = params.ncomp();
        let d = n - 1;
        let iota: Vec<Complex64> = (0..d).map(|a| Complex64::new(0.0, 2.0 * PI * xi[a])).collect();
        let xi2: f64 = xi[..d].iter().map(|x| x * x).sum();
        let gamma = if mode.is_adjoint() { -params.gamma } else { params.gamma };
        let diag = Complex64::new(4.0 * PI * PI * xi2, -2.0 * PI * gamma * xi[0]);
        let beta = if mode.is_adjoint() {
            (0..n * n).map(|r| params.beta_at(r % n, r / n)).collect()
        } else {
            params.beta.clone()
        };
        Coefficients { n, iota, diag, alpha: params.alpha, beta, slip: mode.has_slip() }
    }
}

/// Assembles the unscaled collocation matrix of size `(n + 1) N`.
pub fn assemble_system(
    xi: &[f64],
    params: &PhysicalParams,
    mode: BoundaryMode,
    cheb: &Chebyshev,
) -> DMatrix<Complex64> {
    let co = Coefficients::new(xi, params, mode);
    let n = co.n;
    let nz = cheb.len();
    let size = (n + 1) * nz;
    let d1 = cheb.d1();
    let d2 = cheb.d2();
    let w = |c: usize, j: usize| c * nz + j;
    let q = |j: usize| n * nz + j;
    let top = nz - 1;
    let mut a = DMatrix::from_element(size, size, ZERO);

    // Tangential momentum and its boundary replacements.
    for ca in 0..n - 1 {
        let ia = co.iota[ca];
        for j in 0..nz {
            let r = w(ca, j);
            if j == top {
                for m in 0..nz {
                    a[(r, w(ca, m))] -= d1[j * nz + m];
                }
                a[(r, w(n - 1, j))] -= ia;
            } else if j == 0 && co.slip {
                for m in 0..nz {
                    a[(r, w(ca, m))] -= co.alpha * d1[m];
                }
                a[(r, w(n - 1, 0))] -= ia * co.alpha;
                for c in 0..n {
                    a[(r, w(c, 0))] += co.beta[ca * n + c];
                }
            } else if j == 0 {
                a[(r, w(ca, 0))] = ONE;
            } else {
                for m in 0..nz {
                    a[(r, w(ca, m))] -= d2[j * nz + m];
                    a[(r, w(n - 1, m))] -= ia * d1[j * nz + m];
                }
                a[(r, w(ca, j))] += co.diag;
                for cb in 0..n - 1 {
                    a[(r, w(cb, j))] -= ia * co.iota[cb];
                }
                a[(r, q(j))] += ia;
            }
        }
    }

    // Normal momentum; the top row carries the normal stress.
    for j in 0..nz {
        let r = w(n - 1, j);
        if j == top {
            a[(r, q(j))] = ONE;
            for m in 0..nz {
                a[(r, w(n - 1, m))] -= 2.0 * d1[j * nz + m];
            }
        } else {
            for m in 0..nz {
                let dm = d1[j * nz + m];
                a[(r, w(n - 1, m))] -= 2.0 * d2[j * nz + m];
                a[(r, q(m))] += dm;
                for cb in 0..n - 1 {
                    a[(r, w(cb, m))] -= co.iota[cb] * dm;
                }
            }
            a[(r, w(n - 1, j))] += co.diag;
        }
    }

    // Continuity; the bottom row carries no penetration.
    for j in 0..nz {
        let r = q(j);
        if j == 0 {
            a[(r, w(n - 1, 0))] = ONE;
        } else {
            for cb in 0..n - 1 {
                a[(r, w(cb, j))] += co.iota[cb];
            }
            for m in 0..nz {
                a[(r, w(n - 1, m))] += d1[j * nz + m];
            }
        }
    }
    a
}

/// Right-hand side matching the row layout of [`assemble_system`].
pub fn assemble_rhs(data: &FrequencyData, mode: BoundaryMode, nz: usize) -> Vec<Complex64> {
    let n = data.k.len();
    let top = nz - 1;
    let mut b = vec![ZERO; (n + 1) * nz];
    for c in 0..n - 1 {
        for j in 1..top {
            b[c * nz + j] = data.f[c * nz + j];
        }
        b[c * nz + top] = data.k[c];
        if mode.has_slip() {
            b[c * nz] = data.l[c];
        }
    }
    for j in 0..top {
        b[(n - 1) * nz + j] = data.f[(n - 1) * nz + j];
    }
    b[(n - 1) * nz + top] = data.k[n - 1];
    for j in 1..nz {
        b[n * nz + j] = data.g[j];
    }
    b
}

/// Factored per-frequency operator, reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct FrequencyOperator {
    xi: [f64; 2],
    mode: BoundaryMode,
    n: usize,
    nz: usize,
    row_scale: Vec<f64>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl FrequencyOperator {
    pub fn new(
        xi: &[f64],
        params: &PhysicalParams,
        mode: BoundaryMode,
        cheb: &Chebyshev,
    ) -> Result<Self> {
        let n = params.ncomp();
        let nz = cheb.len();
        let mut a = assemble_system(xi, params, mode, cheb);
        let size = a.nrows();
        let mut row_scale = vec![1.0; size];
        for (r, scale) in row_scale.iter_mut().enumerate() {
            let m = a.row(r).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m > 0.0 {
                *scale = 1.0 / m;
                a.row_mut(r).iter_mut().for_each(|v| *v *= *scale);
            }
        }
        let norm1 = one_norm(&a);
        let lu = a.lu();
        let mut xi_arr = [0.0; 2];
        xi_arr[..xi.len().min(2)].copy_from_slice(&xi[..xi.len().min(2)]);
        let xi_vec = xi[..n - 1].to_vec();
        if !lu.is_invertible() {
            return Err(Error::Singular { xi: xi_vec, mode: mode.to_string() });
        }
        let condition = norm1 * inverse_one_norm_estimate(&lu);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::IllConditioned { xi: xi_vec, mode: mode.to_string(), condition });
        }
        Ok(FrequencyOperator { xi: xi_arr, mode, n, nz, row_scale, lu, condition })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi[..self.n - 1]
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// 1-norm condition estimate of the equilibrated matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, data: &FrequencyData) -> FrequencySolution {
        let rhs = assemble_rhs(data, self.mode, self.nz);
        let b = DVector::from_iterator(
            rhs.len(),
            rhs.iter().zip(&self.row_scale).map(|(v, s)| v * *s),
        );
        let x = self.lu.solve(&b).expect("factorization checked invertible");
        FrequencySolution::from_vector(self.n, self.nz, x.as_slice())
    }
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager–Higham estimate of `||A^-1||_1` from an LU factorization.
fn inverse_one_norm_estimate(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let l = lu.l();
    let u = lu.u();
    let n = l.nrows();
    let solve = |b: &DVector<Complex64>| lu.solve(b).expect("invertible");
    let solve_adjoint = |b: &DVector<Complex64>| {
        let y = u.ad_solve_upper_triangular(b).expect("invertible");
        let mut z = l.ad_solve_lower_triangular(&y).expect("unit diagonal");
        lu.p().inv_permute_rows(&mut z);
        z
    };
    let mut x = DVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        est = y.iter().map(|v| v.norm()).sum::<f64>();
        let s = y.map(|v| if v.norm() > 0.0 { v / v.norm() } else { ONE });
        let z = solve_adjoint(&s);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, 0.0), |acc, e| if e.1 > acc.1 { e } else { acc });
        let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = DVector::from_element(n, ZERO);
        x[j] = ONE;
    }
    // Higham's alternating-sign safeguard vector.
    let alt = DVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0)), 0.0)
    });
    let alt_est = 2.0 * solve(&alt).iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt_est)
}

/// Solves one frequency.
pub fn solve_frequency(
    xi: &[f64],
    data: &FrequencyData,
    params: &PhysicalParams,
    mode: BoundaryMode,
    cheb: &Chebyshev,
) -> Result<FrequencySolution> {
    Ok(FrequencyOperator::new(xi, params, mode, cheb)?.solve(data))
}

/// Solves the adjoint normal-stress problem: speed `-gamma`, `beta^T`, data
/// `k = psi e_n`. The result is `(V psi, Q psi)`.
pub fn solve_adjoint(
    xi: &[f64],
    psi: Complex64,
    params: &PhysicalParams,
    cheb: &Chebyshev,
) -> Result<FrequencySolution> {
    let data = FrequencyData::normal_stress(params.ncomp(), cheb.len(), psi);
    solve_frequency(xi, &data, params, BoundaryMode::Adjoint, cheb)
}

/// Largest absolute collocation residual over all rows (interior equations
/// and boundary rows), before equilibration.
pub fn residual_norm(
    solution: &FrequencySolution,
    data: &FrequencyData,
    xi: &[f64],
    params: &PhysicalParams,
    mode: BoundaryMode,
    cheb: &Chebyshev,
) -> f64 {
    let a = assemble_system(xi, params, mode, cheb);
    let x = DVector::from_vec(solution.to_vector());
    let b = assemble_rhs(data, mode, cheb.len());
    (a * x).iter().zip(&b).map(|(r, b)| (r - b).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParams {
        let mut p = PhysicalParams::new(1, 0.1, 1.0, 0.3);
        p.beta = vec![1.0, 0.2, -0.1, 1.5];
        p
    }

    /// Polynomial with derivative helpers, evaluated analytically.
    #[derive(Clone)]
    struct Poly(Vec<Complex64>);

    impl Poly {
        fn eval(&self, x: f64) -> Complex64 {
            self.0.iter().rev().fold(ZERO, |acc, c| acc * x + c)
        }
        fn deriv(&self) -> Poly {
            Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Pushes polynomial profiles through the continuous operator (d = 1).
    fn manufacture(
        xi: f64,
        p: &PhysicalParams,
        mode: BoundaryMode,
        w1: &Poly,
        w2: &Poly,
        q: &Poly,
        cheb: &Chebyshev,
    ) -> FrequencyData {
        let i1 = c(0.0, 2.0 * PI * xi);
        let gamma = if mode.is_adjoint() { -p.gamma } else { p.gamma };
        let beta = |i: usize, j: usize| if mode.is_adjoint() { p.beta_at(j, i) } else { p.beta_at(i, j) };
        let k2 = 4.0 * PI * PI * xi * xi;
        let tr = c(0.0, -2.0 * PI * gamma * xi);
        let (d1w1, d1w2, d1q) = (w1.deriv(), w2.deriv(), q.deriv());
        let (d2w1, d2w2) = (d1w1.deriv(), d1w2.deriv());
        let nz = cheb.len();
        let mut data = FrequencyData::zeros(2, nz);
        for (j, &x) in cheb.nodes().iter().enumerate() {
            let div = i1 * w1.eval(x) + d1w2.eval(x);
            let ddiv = i1 * d1w1.eval(x) + d2w2.eval(x);
            data.f[j] = -d2w1.eval(x) + (k2 + tr) * w1.eval(x) + i1 * q.eval(x) - i1 * div;
            data.f[nz + j] = -d2w2.eval(x) + (k2 + tr) * w2.eval(x) + d1q.eval(x) - ddiv;
            data.g[j] = div;
        }
        let b = cheb.depth();
        data.k[0] = -(d1w1.eval(b) + i1 * w2.eval(b));
        data.k[1] = q.eval(b) - 2.0 * d1w2.eval(b);
        data.l[0] = -p.alpha * (d1w1.eval(0.0) + i1 * w2.eval(0.0))
            + beta(0, 0) * w1.eval(0.0)
            + beta(0, 1) * w2.eval(0.0);
        data
    }

    fn sample_polys(noslip: bool) -> (Poly, Poly, Poly) {
        let w1 = if noslip {
            Poly(vec![ZERO, c(0.4, -0.2), c(-0.3, 0.1), c(0.05, 0.2)])
        } else {
            Poly(vec![c(0.7, 0.1), c(0.4, -0.2), c(-0.3, 0.1), c(0.05, 0.2)])
        };
        let w2 = Poly(vec![ZERO, c(0.2, 0.3), c(0.1, -0.4), ZERO, c(-0.2, 0.05)]);
        let q = Poly(vec![c(1.0, -0.5), c(0.3, 0.2), c(-0.1, 0.0)]);
        (w1, w2, q)
    }

    fn check_manufactured(xi: f64, mode: BoundaryMode) {
        let p = params();
        let cheb = Chebyshev::new(24, 1.3);
        let (w1, w2, q) = sample_polys(!mode.has_slip());
        let data = manufacture(xi, &p, mode, &w1, &w2, &q, &cheb);
        let sol = solve_frequency(&[xi], &data, &p, mode, &cheb).unwrap();
        for (j, &x) in cheb.nodes().iter().enumerate() {
            assert!((sol.w[j] - w1.eval(x)).norm() < 1e-9, "w1 at {x}: {}", sol.w[j]);
            assert!((sol.w[24 + j] - w2.eval(x)).norm() < 1e-9);
            assert!((sol.q[j] - q.eval(x)).norm() < 1e-9);
        }
        let res = residual_norm(&sol, &data, &[xi], &p, mode, &cheb);
        assert!(res < 1e-10 * data.max_abs().max(1.0), "residual {res}");
    }

    #[test]
    fn manufactured_slip() {
        for xi in [0.0, 0.05, -0.7, 3.1] {
            check_manufactured(xi, BoundaryMode::Slip);
        }
    }

    #[test]
    fn manufactured_noslip() {
        for xi in [0.0, 0.3, -2.0] {
            check_manufactured(xi, BoundaryMode::NoSlip);
        }
    }

    #[test]
    fn manufactured_adjoint() {
        for xi in [0.0, 0.4, -1.2] {
            check_manufactured(xi, BoundaryMode::Adjoint);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = params();
        let cheb = Chebyshev::new(16, 1.0);
        let sol = solve_frequency(&[0.3], &FrequencyData::zeros(2, 16), &p, BoundaryMode::Slip, &cheb)
            .unwrap();
        assert_eq!(sol.max_abs(), 0.0);
        assert_eq!(residual_norm(&sol, &FrequencyData::zeros(2, 16), &[0.3], &p, BoundaryMode::Slip, &cheb), 0.0);
        assert_eq!(solve_adjoint(&[0.3], ZERO, &p, &cheb).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn zero_frequency_is_well_conditioned() {
        let p = params();
        let cheb = Chebyshev::new(48, 1.0);
        for mode in [BoundaryMode::Slip, BoundaryMode::NoSlip, BoundaryMode::Adjoint] {
            let op = FrequencyOperator::new(&[0.0], &p, mode, &cheb).unwrap();
            assert!(op.condition() < 1e8, "{mode}: {}", op.condition());
        }
    }

    #[test]
    fn noslip_rows_pin_all_components() {
        let p = params();
        let cheb = Chebyshev::new(10, 1.0);
        let a = assemble_system(&[0.5], &p, BoundaryMode::NoSlip, &cheb);
        // bottom rows: tangential momentum row 0 and continuity row 2N
        for (r, col) in [(0, 0), (20, 10)] {
            for cidx in 0..a.ncols() {
                let expect = if cidx == col { ONE } else { ZERO };
                assert_eq!(a[(r, cidx)], expect);
            }
        }
    }

    #[test]
    fn adjoint_conjugates_under_frequency_flip() {
        let p = params();
        let cheb = Chebyshev::new(32, 1.0);
        let a = solve_adjoint(&[0.45], ONE, &p, &cheb).unwrap();
        let b = solve_adjoint(&[-0.45], ONE, &p, &cheb).unwrap();
        for (x, y) in a.w.iter().chain(&a.q).zip(b.w.iter().chain(&b.q)) {
            assert!((x.conj() - y).norm() < 1e-12);
        }
    }

    #[test]
    fn residual_grows_linearly_with_perturbation() {
        let p = params();
        let cheb = Chebyshev::new(16, 1.0);
        let mut data = FrequencyData::zeros(2, 16);
        data.k[1] = ONE;
        let sol = solve_frequency(&[0.2], &data, &p, BoundaryMode::Slip, &cheb).unwrap();
        let r = |eps: f64| {
            let mut s = sol.clone();
            s.q[5] += eps;
            residual_norm(&s, &data, &[0.2], &p, BoundaryMode::Slip, &cheb)
        };
        let (r1, r2) = (r(1e-3), r(2e-3));
        assert!((r2 / r1 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn params_validation() {
        let mut p = PhysicalParams::new(1, 0.0, 1.0, 0.1);
        assert!(p.validate(1).is_ok());
        assert!(p.validate(2).is_err());
        p.beta = vec![-1.0, 0.0, 0.0, -1.0];
        assert!(p.validate(1).is_err());
        let p = PhysicalParams::new(2, 0.0, 1.0, 0.1);
        assert!(p.validate(2).unwrap_err().to_string().contains("n = 2"));
        assert!(PhysicalParams::new(1, 0.1, 1.0, 0.0).validate(1).is_err());
    }
}
