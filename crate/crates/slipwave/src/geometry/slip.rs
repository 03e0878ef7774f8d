//! Bottom friction laws `A: R^n -> R^n` and a randomized checker for the
//! monotonicity and coercivity they need.

use crate::error::{Error, Result};
use crate::sampling::{seeded_rng, uniform};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Friction law. Both variants act through the slip matrix `beta`, which is
/// also `DA(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlipLaw {
    /// `A(w) = beta w`.
    Linear,
    /// `A(w) = beta w + coefficient |w|^2 w`, claimed to satisfy
    /// `A(w).w >= theta |w|^2` on the ball of radius `delta`.
    Cubic { coefficient: f64, theta: f64, delta: f64 },
}

impl SlipLaw {
    pub fn is_linear(&self) -> bool {
        matches!(self, SlipLaw::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SlipLaw::Linear => Ok(()),
            SlipLaw::Cubic { coefficient, theta, delta } => {
                if !coefficient.is_finite() {
                    return Err(Error::InvalidParams("cubic slip coefficient must be finite".into()));
                }
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::InvalidParams(format!("slip theta must be > 0, got {theta}")));
                }
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::InvalidParams(format!("slip delta must be > 0, got {delta}")));
                }
                Ok(())
            }
        }
    }

    /// `A(w)` for the row-major `n x n` matrix `beta`.
    pub fn apply(&self, beta: &[f64], w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut out: Vec<f64> = (0..n).map(|i| (0..n).map(|j| beta[i * n + j] * w[j]).sum()).collect();
        if let SlipLaw::Cubic { coefficient, .. } = *self {
            let w2: f64 = w.iter().map(|v| v * v).sum();
            for (o, v) in out.iter_mut().zip(w) {
                *o += coefficient * w2 * v;
            }
        }
        out
    }

    /// `A(w) - beta w`.
    pub fn remainder(&self, w: &[f64]) -> Vec<f64> {
        match *self {
            SlipLaw::Linear => vec![0.0; w.len()],
            SlipLaw::Cubic { coefficient, .. } => {
                let w2: f64 = w.iter().map(|v| v * v).sum();
                w.iter().map(|v| coefficient * w2 * v).collect()
            }
        }
    }

    /// Claimed `(theta, delta)`; the linear law claims the smallest
    /// eigenvalue of the symmetric part of `beta` on every ball.
    pub fn claimed_bounds(&self, beta: &[f64]) -> (f64, f64) {
        match *self {
            SlipLaw::Linear => (symmetric_min_eigenvalue(beta), f64::INFINITY),
            SlipLaw::Cubic { theta, delta, .. } => (theta, delta),
        }
    }
}

fn symmetric_min_eigenvalue(m: &[f64]) -> f64 {
    let n = (m.len() as f64).sqrt().round() as usize;
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i * n + j] + m[j * n + i]));
    SymmetricEigen::new(sym).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Outcome of [`slip_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlipReport {
    /// Smallest `A(w).w / |w|^2` seen on the coercivity ball.
    pub theta_observed: f64,
    /// `DA(0)` from central differences, row-major.
    pub beta_estimate: Vec<f64>,
    /// Smallest eigenvalue of the symmetric part of `beta_estimate`.
    pub beta_min_eigenvalue: f64,
    /// First sample violating monotonicity or the claimed coercivity.
    pub witness: Option<Vec<f64>>,
    pub passed: bool,
}

/// Randomized check of a law given as a closure: `A(0) = 0`,
/// `A(w).w > 0` for samples of all sizes, `A(w).w >= theta |w|^2` on the
/// ball of radius `delta` (capped at 1e3 when infinite) and positive definite
/// `DA(0)`.
pub fn slip_check_map<F>(map: F, n: usize, theta: f64, delta: f64, samples: usize, seed: u64) -> SlipReport
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rng = seeded_rng(seed);
    let radius = if delta.is_finite() { delta } else { 1e3 };
    let mut witness = None;
    let mut theta_observed = f64::INFINITY;

    let origin = map(&vec![0.0; n]);
    if origin.iter().any(|v| v.abs() > 1e-14) {
        witness = Some(vec![0.0; n]);
    }
    for i in 0..samples {
        let mut w: Vec<f64> = (0..n).map(|_| uniform(&mut rng)).collect();
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            continue;
        }
        // Alternate between the coercivity ball and log-spread sizes.
        let target = if i % 2 == 0 {
            radius * rng.random::<f64>()
        } else {
            radius * 10f64.powf(6.0 * rng.random::<f64>() - 3.0)
        };
        if target == 0.0 {
            continue;
        }
        w.iter_mut().for_each(|v| *v *= target / norm);
        let a = map(&w);
        let aw = dot(&a, &w);
        let w2 = target * target;
        let mut bad = aw <= 0.0;
        if target <= radius {
            theta_observed = theta_observed.min(aw / w2);
            bad |= aw < theta * w2 * (1.0 - 1e-12);
        }
        if bad && witness.is_none() {
            witness = Some(w);
        }
    }

    let h = 1e-5 * radius.min(1.0);
    let mut beta_estimate = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = h;
        let plus = map(&e);
        e[j] = -h;
        let minus = map(&e);
        for i in 0..n {
            beta_estimate[i * n + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    let beta_min_eigenvalue = symmetric_min_eigenvalue(&beta_estimate);
    let passed = witness.is_none() && beta_min_eigenvalue > 0.0;
    SlipReport { theta_observed, beta_estimate, beta_min_eigenvalue, witness, passed }
}

/// [`slip_check_map`] for a [`SlipLaw`] with slip matrix `beta`.
pub fn slip_check(law: &SlipLaw, beta: &[f64], samples: usize, seed: u64) -> SlipReport {
    let n = (beta.len() as f64).sqrt().round() as usize;
    let (theta, delta) = law.claimed_bounds(beta);
    slip_check_map(|w| law.apply(beta, w), n, theta, delta, samples, seed)
}
