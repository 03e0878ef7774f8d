//! The flattening map `F(x', x_n) = (x', x_n + eta(x') phi(x_n))` from the
//! reference strip onto the fluid domain, and the matrices built from it:
//! `A = (grad F)^-T`, `J = det grad F = 1 + eta phi'` and `K = 1/J`.

use super::padded::surface_to_padded;
use crate::error::{Error, Result};
use crate::spectral::{Grid, SurfaceSpectrum};

/// Cutoff profile: 0 below `b/4`, 1 above `3b/4`, quintic smoothstep in
/// between (twice continuously differentiable and monotone).
pub fn cutoff(x: f64, depth: f64) -> f64 {
    let t = ((x - 0.25 * depth) / (0.5 * depth)).clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Derivative of [`cutoff`].
pub fn cutoff_derivative(x: f64, depth: f64) -> f64 {
    let t = (x - 0.25 * depth) / (0.5 * depth);
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t) / (0.5 * depth)
}

/// Geometric quantities on the padded grid (node-major, see
/// [`padded`](super::padded)).
#[derive(Debug, Clone)]
pub struct FlatteningMaps {
    grid: Grid,
    /// Cutoff and its derivative at the Chebyshev nodes.
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// Surface and its horizontal gradient on the padded plane; the gradient
    /// is stored point-major, `grad_eta[p * d + a]`.
    pub eta: Vec<f64>,
    pub grad_eta: Vec<f64>,
    /// `A` per point, row-major `n x n`.
    pub a_matrix: Vec<f64>,
    pub jacobian: Vec<f64>,
    pub inv_jacobian: Vec<f64>,
}

impl FlatteningMaps {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Padded points per plane.
    pub fn np(&self) -> usize {
        self.grid.n_padded_points()
    }

    /// `A` at node `j`, point `p`.
    pub fn a_at(&self, j: usize, p: usize) -> &[f64] {
        let n = self.grid.ncomp();
        let i = (j * self.np() + p) * n * n;
        &self.a_matrix[i..i + n * n]
    }

    pub fn min_jacobian(&self) -> f64 {
        self.jacobian.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Image `F(x)` of node `j`, point `p` (length `n`).
    pub fn map_point(&self, j: usize, p: usize) -> Vec<f64> {
        let d = self.grid.dim();
        let x = self.grid.point(p, self.grid.padded_nx());
        let z = self.grid.cheb().nodes()[j];
        let mut out = x[..d].to_vec();
        out.push(z + self.eta[p] * self.phi[j]);
        out
    }

    /// `grad F` at node `j`, point `p`, row-major (rows are components).
    pub fn deformation_gradient(&self, j: usize, p: usize) -> Vec<f64> {
        let n = self.grid.ncomp();
        let d = n - 1;
        let mut m = vec![0.0; n * n];
        for a in 0..d {
            m[a * n + a] = 1.0;
            m[d * n + a] = self.phi[j] * self.grad_eta[p * d + a];
        }
        m[d * n + d] = self.jacobian[j * self.np() + p];
        m
    }
}

/// Builds the flattening quantities for `eta` on the padded grid.
pub fn build_flattening(eta: &SurfaceSpectrum, grid: &Grid) -> Result<FlatteningMaps> {
    let n = grid.ncomp();
    let d = n - 1;
    let np = grid.n_padded_points();
    let nz = grid.nz();
    let b = grid.depth();
    let nodes = grid.cheb().nodes();
    let phi: Vec<f64> = nodes.iter().map(|&x| cutoff(x, b)).collect();
    let dphi: Vec<f64> = nodes.iter().map(|&x| cutoff_derivative(x, b)).collect();
    let eta_p = surface_to_padded(eta, 0, None);
    let grads: Vec<Vec<f64>> = (0..d).map(|a| surface_to_padded(eta, 0, Some(a))).collect();
    let mut grad_eta = vec![0.0; np * d];
    for p in 0..np {
        for a in 0..d {
            grad_eta[p * d + a] = grads[a][p];
        }
    }

    let mut a_matrix = vec![0.0; nz * np * n * n];
    let mut jacobian = vec![0.0; nz * np];
    let mut inv_jacobian = vec![0.0; nz * np];
    for j in 0..nz {
        for p in 0..np {
            let i = j * np + p;
            let jac = 1.0 + eta_p[p] * dphi[j];
            jacobian[i] = jac;
            inv_jacobian[i] = 1.0 / jac;
            let m = &mut a_matrix[i * n * n..(i + 1) * n * n];
            for a in 0..d {
                m[a * n + a] = 1.0;
                m[a * n + d] = -grad_eta[p * d + a] * phi[j] / jac;
            }
            m[d * n + d] = 1.0 / jac;
        }
    }
    let maps = FlatteningMaps {
        grid: grid.clone(),
        phi,
        dphi,
        eta: eta_p,
        grad_eta,
        a_matrix,
        jacobian,
        inv_jacobian,
    };
    let min_j = maps.min_jacobian();
    if !(min_j > 0.0) {
        return Err(Error::NotDiffeomorphism { min_j });
    }
    Ok(maps)
}
