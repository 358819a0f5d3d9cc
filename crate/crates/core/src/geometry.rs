//! Fisher–Rao geometry of the Gaussian manifolds.
//!
//! Coordinates are `(mu_k1, mu_k2, sigma)`; the correlation `r` is a model
//! constant, not a coordinate.

use serde::{Deserialize, Serialize};

use crate::models::GaussianModelParams;

pub const MU1: usize = 0;
pub const MU2: usize = 1;
pub const SIGMA: usize = 2;

/// Symmetric 3x3 metric tensor at a manifold point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor3 {
    pub entries: [[f64; 3]; 3],
}

impl MetricTensor3 {
    pub fn new(entries: [[f64; 3]; 3]) -> Self {
        Self { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Leading principal minors, smallest first.
    pub fn leading_minors(&self) -> [f64; 3] {
        let m = &self.entries;
        [
            m[0][0],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
            self.determinant(),
        ]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|&d| d > 0.0)
    }

    /// Inverse via the adjugate. `None` for a singular matrix.
    pub fn inverse(&self) -> Option<[[f64; 3]; 3]> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.entries;
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // cofactor of (j, i)
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
        Some(inv)
    }

    /// `g_ij u^i v^j`.
    pub fn inner(&self, u: &[f64; 3], v: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += self.entries[i][j] * u[i] * v[j];
            }
        }
        acc
    }
}

/// Connection coefficients, `gamma[k][l][m]` = Γ^k_{lm}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelSymbols3 {
    pub gamma: [[[f64; 3]; 3]; 3],
}

impl ChristoffelSymbols3 {
    pub fn get(&self, k: usize, l: usize, m: usize) -> f64 {
        self.gamma[k][l][m]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|k| (0..3).all(|l| (0..3).all(|m| self.gamma[k][l][m] == self.gamma[k][m][l])))
    }

    /// `-Γ^k_{lm} v^l v^m`, the geodesic acceleration for velocity `v`.
    pub fn contract(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for (k, out) in acc.iter_mut().enumerate() {
            let mut s = 0.0;
            for l in 0..3 {
                for m in 0..3 {
                    s += self.gamma[k][l][m] * v[l] * v[m];
                }
            }
            *out = -s;
        }
        acc
    }
}

/// Inverse of the unit-variance correlation matrix, `[[1, -r], [-r, 1]] / (1 - r^2)`.
pub(crate) fn inverse_correlation(r: f64) -> [[f64; 2]; 2] {
    let f = 1.0 / (1.0 - r * r);
    [[f, -r * f], [-r * f, f]]
}

/// Analytic Fisher–Rao metric.
///
/// The mean block is `C^-1 / sigma^2`, `g_σσ = 4 / sigma^2`, and the
/// mean–width cross terms vanish.
pub fn fisher_metric(params: &GaussianModelParams) -> MetricTensor3 {
    let s2 = params.sigma() * params.sigma();
    let c = inverse_correlation(params.r());
    MetricTensor3::new([
        [c[0][0] / s2, c[0][1] / s2, 0.0],
        [c[1][0] / s2, c[1][1] / s2, 0.0],
        [0.0, 0.0, 4.0 / s2],
    ])
}

/// Fisher density `sqrt(det g) = 2 / (sigma^3 sqrt(1 - r^2))`.
pub fn fisher_density(params: &GaussianModelParams) -> f64 {
    let s = params.sigma();
    2.0 / (s * s * s * (1.0 - params.r() * params.r()).sqrt())
}

/// Analytic Christoffel symbols of the Fisher–Rao metric.
pub fn christoffel(params: &GaussianModelParams) -> ChristoffelSymbols3 {
    let s = params.sigma();
    let c = inverse_correlation(params.r());
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in [MU1, MU2] {
        gamma[a][a][SIGMA] = -1.0 / s;
        gamma[a][SIGMA][a] = -1.0 / s;
        for b in [MU1, MU2] {
            gamma[SIGMA][a][b] = c[a][b] / (4.0 * s);
        }
    }
    gamma[SIGMA][SIGMA][SIGMA] = -1.0 / s;
    ChristoffelSymbols3 { gamma }
}
