//! Chebyshev–Gauss–Lobatto collocation on `[0, b]`.
//!
//! Node `j` sits at `x_j = b (1 - cos(pi j / (N-1))) / 2`, so node 0 is the
//! bottom and node `N-1` the top.

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Chebyshev {
    n: usize,
    depth: f64,
    nodes: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl Chebyshev {
    /// Builds nodes, first and second differentiation matrices and
    /// Clenshaw–Curtis weights. Panics if `n < 2` or `depth <= 0`.
    pub fn new(n: usize, depth: f64) -> Self {
        assert!(n >= 2, "need at least two Chebyshev nodes");
        assert!(depth > 0.0, "depth must be positive");
        let m = n - 1;
        let theta: Vec<f64> = (0..n).map(|j| PI * j as f64 / m as f64).collect();
        let nodes: Vec<f64> = theta.iter().map(|t| 0.5 * depth * (1.0 - t.cos())).collect();

        // Differentiation in t = cos(theta), then mapped with dx = -(b/2) dt.
        let c = |j: usize| if j == 0 || j == m { 2.0 } else { 1.0 };
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut dt = vec![0.0; n * n];
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                // t_i - t_j computed through the product formula to avoid cancellation
                let diff = 2.0
                    * ((theta[i] + theta[j]) / 2.0).sin()
                    * ((theta[j] - theta[i]) / 2.0).sin();
                let v = c(i) / c(j) * sign(i + j) / diff;
                dt[i * n + j] = v;
                row_sum += v;
            }
            dt[i * n + i] = -row_sum;
        }
        let scale = -2.0 / depth;
        let d1: Vec<f64> = dt.iter().map(|v| v * scale).collect();
        let d2 = matmul(&d1, &d1, n);

        let mut w = vec![0.0; n];
        let mut v = vec![1.0; n];
        if m % 2 == 0 {
            let end = 1.0 / ((m * m) as f64 - 1.0);
            w[0] = end;
            w[m] = end;
            for k in 1..m / 2 {
                for (i, vi) in v.iter_mut().enumerate().take(m).skip(1) {
                    *vi -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4.0 * (k * k) as f64 - 1.0);
                }
            }
            for (i, vi) in v.iter_mut().enumerate().take(m).skip(1) {
                *vi -= (m as f64 * theta[i]).cos() / ((m * m) as f64 - 1.0);
            }
        } else {
            let end = 1.0 / (m * m) as f64;
            w[0] = end;
            w[m] = end;
            for k in 1..=(m - 1) / 2 {
                for (i, vi) in v.iter_mut().enumerate().take(m).skip(1) {
                    *vi -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4.0 * (k * k) as f64 - 1.0);
                }
            }
        }
        for i in 1..m {
            w[i] = 2.0 * v[i] / m as f64;
        }
        let weights = w.iter().map(|x| x * depth / 2.0).collect();

        let bary = (0..n)
            .map(|j| sign(j) * if j == 0 || j == m { 0.5 } else { 1.0 })
            .collect();

        Chebyshev { n, depth, nodes, d1, d2, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// First-derivative matrix, row-major `N x N`.
    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    /// Second-derivative matrix, row-major `N x N`.
    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    /// Clenshaw–Curtis weights on `[0, b]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diff(&self, v: &[Complex64]) -> Vec<Complex64> {
        apply(&self.d1, v, self.n)
    }

    pub fn diff2(&self, v: &[Complex64]) -> Vec<Complex64> {
        apply(&self.d2, v, self.n)
    }

    pub fn diff_real(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.d1[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Derivative of order `k` (0 returns a copy).
    pub fn diff_k(&self, v: &[Complex64], k: usize) -> Vec<Complex64> {
        let mut out = v.to_vec();
        for _ in 0..k {
            out = self.diff(&out);
        }
        out
    }

    pub fn integrate(&self, v: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(v).map(|(w, x)| x * *w).sum()
    }

    pub fn integrate_real(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    /// `∫ |v|^2` by quadrature.
    pub fn integrate_abs2(&self, v: &[Complex64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x.norm_sqr()).sum()
    }

    /// Barycentric interpolation of nodal values at `x` in `[0, b]`.
    pub fn interpolate(&self, v: &[Complex64], x: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..self.n {
            let dx = x - self.nodes[j];
            if dx == 0.0 {
                return v[j];
            }
            let c = self.bary[j] / dx;
            num += v[j] * c;
            den += c;
        }
        num / den
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn apply(m: &[f64], v: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            m[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, x)| acc + x * *a)
        })
        .collect()
}
