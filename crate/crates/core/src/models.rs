//! Bivariate Gaussian momentum models.
//!
//! The pre-collision state is an uncorrelated Gaussian in `(k1, k2)`; the
//! post-collision state carries a fixed correlation coefficient `r`. Both share
//! a common width `sigma` for the two momenta.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlations at or beyond this magnitude are rejected at construction.
pub const MAX_CORRELATION: f64 = 0.999;

/// A point `(mu_k1, mu_k2, sigma)` on one of the statistical manifolds, together
/// with the (fixed) correlation coefficient of the model. `r == 0` is the
/// uncorrelated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModelParams {
    mu_k1: f64,
    mu_k2: f64,
    sigma: f64,
    r: f64,
}

impl GaussianModelParams {
    pub fn new(mu_k1: f64, mu_k2: f64, sigma: f64, r: f64) -> Result<Self> {
        if !mu_k1.is_finite() {
            return Err(Error::invalid("mu_k1", mu_k1, "must be finite"));
        }
        if !mu_k2.is_finite() {
            return Err(Error::invalid("mu_k2", mu_k2, "must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", sigma, "must be finite and > 0"));
        }
        check_correlation(r)?;
        Ok(Self {
            mu_k1,
            mu_k2,
            sigma,
            r,
        })
    }

    pub fn uncorrelated(mu_k1: f64, mu_k2: f64, sigma: f64) -> Result<Self> {
        Self::new(mu_k1, mu_k2, sigma, 0.0)
    }

    /// Builds the point with coordinates `theta = (mu_k1, mu_k2, sigma)`.
    pub fn from_theta(theta: [f64; 3], r: f64) -> Result<Self> {
        Self::new(theta[0], theta[1], theta[2], r)
    }

    pub fn mu_k1(&self) -> f64 {
        self.mu_k1
    }

    pub fn mu_k2(&self) -> f64 {
        self.mu_k2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> [f64; 3] {
        [self.mu_k1, self.mu_k2, self.sigma]
    }

    pub fn is_uncorrelated(&self) -> bool {
        self.r == 0.0
    }
}

/// Validates a model correlation coefficient.
pub fn check_correlation(r: f64) -> Result<()> {
    if !r.is_finite() || r.abs() >= MAX_CORRELATION {
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: -MAX_CORRELATION,
            upper: MAX_CORRELATION,
        });
    }
    Ok(())
}

/// A pair of momentum values `(k1, k2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumPair {
    pub k1: f64,
    pub k2: f64,
}

impl MomentumPair {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }
}

/// Quadratic form of the correlated Gaussian exponent, already divided by
/// `sigma^2 (1 - r^2)`.
fn mahalanobis2(params: &GaussianModelParams, k: MomentumPair) -> f64 {
    let a = k.k1 - params.mu_k1;
    let b = k.k2 - params.mu_k2;
    let r = params.r;
    (a * a - 2.0 * r * a * b + b * b) / (params.sigma * params.sigma * (1.0 - r * r))
}

/// Natural logarithm of [`pdf`].
pub fn log_pdf(params: &GaussianModelParams, k: MomentumPair) -> f64 {
    let s2 = params.sigma * params.sigma;
    let norm = (2.0 * PI * s2).ln() + 0.5 * (1.0 - params.r * params.r).ln();
    -0.5 * mahalanobis2(params, k) - norm
}

/// Bivariate normal density with means `(mu_k1, mu_k2)`, common variance
/// `sigma^2` and correlation `r`.
pub fn pdf(params: &GaussianModelParams, k: MomentumPair) -> f64 {
    let s2 = params.sigma * params.sigma;
    let norm = 2.0 * PI * s2 * (1.0 - params.r * params.r).sqrt();
    (-0.5 * mahalanobis2(params, k)).exp() / norm
}

/// Pre-collision square amplitude in momentum space, written out for the
/// head-on configuration with mean momenta `±k0`.
pub fn qm_pre_density(k0: f64, sigma0: f64, k: MomentumPair) -> f64 {
    let s2 = sigma0 * sigma0;
    let a = k.k1 - k0;
    let b = k.k2 + k0;
    (-(a * a + b * b) / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

/// Post-collision square amplitude in the low-energy s-wave approximation,
/// with entanglement strength `r_qm`.
pub fn qm_post_density(k0: f64, sigma0: f64, r_qm: f64, k: MomentumPair) -> f64 {
    let s2 = sigma0 * sigma0;
    let one_minus = 1.0 - r_qm * r_qm;
    let a = k.k1 - k0;
    let b = k.k2 + k0;
    let q = a * a - 2.0 * r_qm * a * b + b * b;
    (-q / (2.0 * s2 * one_minus)).exp() / (2.0 * PI * s2 * one_minus.sqrt())
}

/// Square grid of `n x n` momentum pairs covering `[lo, hi]^2`.
pub fn momentum_grid(lo: f64, hi: f64, n: usize) -> Vec<MomentumPair> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    let axis: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    axis.iter()
        .flat_map(|&k1| axis.iter().map(move |&k2| MomentumPair::new(k1, k2)))
        .collect()
}

fn check_grid(grid: &[MomentumPair]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("momentum grid is empty".into()));
    }
    Ok(())
}

/// Largest pointwise difference between the quantum pre-collision density and
/// the uncorrelated model evaluated at `(k0, -k0, sigma0)`.
pub fn qm_ig_pre_correspondence(k0: f64, sigma0: f64, grid: &[MomentumPair]) -> Result<f64> {
    check_grid(grid)?;
    let params = GaussianModelParams::uncorrelated(k0, -k0, sigma0)?;
    Ok(grid
        .iter()
        .map(|&k| (qm_pre_density(k0, sigma0, k) - pdf(&params, k)).abs())
        .fold(0.0, f64::max))
}

/// Same comparison for the post-collision state with `r_IG = r_QM = r`.
///
/// The two densities share their functional form for every admissible `r`; the
/// weak-correlation restriction on the identification is interpretive and not
/// enforced here.
pub fn qm_ig_post_correspondence(
    k0: f64,
    sigma0: f64,
    r: f64,
    grid: &[MomentumPair],
) -> Result<f64> {
    check_grid(grid)?;
    let params = GaussianModelParams::new(k0, -k0, sigma0, r)?;
    Ok(grid
        .iter()
        .map(|&k| (qm_post_density(k0, sigma0, r, k) - pdf(&params, k)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn normal(x: f64, mean: f64, sigma: f64) -> f64 {
        let z = (x - mean) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
    }

    #[test]
    fn pdf_reference_values() {
        let p = GaussianModelParams::uncorrelated(1.0, -1.0, 1.0).unwrap();
        assert_relative_eq!(
            pdf(&p, MomentumPair::new(1.0, -1.0)),
            1.0 / (2.0 * PI),
            max_relative = 1e-15
        );

        let p = GaussianModelParams::new(1.0, -1.0, 1.0, 0.5).unwrap();
        let v = pdf(&p, MomentumPair::new(1.0, -1.0));
        assert_relative_eq!(v, 1.0 / (2.0 * PI * 0.75f64.sqrt()), max_relative = 1e-15);
        assert!((v - 0.183776).abs() < 1e-6);

        let p = GaussianModelParams::uncorrelated(0.0, 0.0, 1.0).unwrap();
        let v = pdf(&p, MomentumPair::new(1.0, 0.0));
        assert!((v - 0.096532).abs() < 1e-6);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(GaussianModelParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(GaussianModelParams::new(0.0, 0.0, -1.0, 0.0).is_err());
        assert!(GaussianModelParams::new(0.0, 0.0, 1.0, 0.999).is_err());
        assert!(GaussianModelParams::new(0.0, 0.0, 1.0, -1.5).is_err());
        assert!(GaussianModelParams::new(f64::NAN, 0.0, 1.0, 0.0).is_err());
        assert!(GaussianModelParams::new(0.0, 0.0, 1.0, 0.998).is_ok());
    }

    #[test]
    fn log_pdf_matches_pdf() {
        let p = GaussianModelParams::new(0.3, -1.2, 0.7, -0.4).unwrap();
        for k in momentum_grid(-3.0, 3.0, 7) {
            assert_relative_eq!(log_pdf(&p, k).exp(), pdf(&p, k), max_relative = 1e-13);
        }
    }

    #[test]
    fn pre_correspondence_vanishes() {
        let grid = momentum_grid(-5.0, 5.0, 101);
        for (k0, s0) in [(1.0, 1.0), (0.0, 2.0), (3.0, 0.5)] {
            assert!(qm_ig_pre_correspondence(k0, s0, &grid).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn post_correspondence_vanishes() {
        let grid = momentum_grid(-5.0, 5.0, 101);
        for (k0, s0, r) in [(1.0, 1.0, 0.0), (1.0, 0.1, 1e-3), (2.0, 1.0, 0.5)] {
            assert!(qm_ig_post_correspondence(k0, s0, r, &grid).unwrap() <= 1e-15);
        }
        // r = 0 reduces the post-collision density to the pre-collision one.
        for k in &grid {
            assert_eq!(
                qm_post_density(1.0, 0.7, 0.0, *k),
                qm_pre_density(1.0, 0.7, *k)
            );
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(qm_ig_pre_correspondence(1.0, 1.0, &[]).is_err());
        assert!(qm_ig_post_correspondence(1.0, 1.0, 0.1, &[]).is_err());
    }

    proptest! {
        #[test]
        fn swap_symmetry(m1 in -5.0..5.0f64, m2 in -5.0..5.0f64, s in 0.05..5.0f64,
                         r in -0.95..0.95f64, k1 in -8.0..8.0f64, k2 in -8.0..8.0f64) {
            let p = GaussianModelParams::new(m1, m2, s, r).unwrap();
            let q = GaussianModelParams::new(m2, m1, s, r).unwrap();
            let a = pdf(&p, MomentumPair::new(k1, k2));
            let b = pdf(&q, MomentumPair::new(k2, k1));
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300));
        }

        #[test]
        fn uncorrelated_is_product(m1 in -5.0..5.0f64, m2 in -5.0..5.0f64, s in 0.05..5.0f64,
                                   k1 in -8.0..8.0f64, k2 in -8.0..8.0f64) {
            let p = GaussianModelParams::uncorrelated(m1, m2, s).unwrap();
            let joint = pdf(&p, MomentumPair::new(k1, k2));
            let product = normal(k1, m1, s) * normal(k2, m2, s);
            prop_assert!((joint - product).abs() <= 1e-15_f64.max(1e-13 * product));
        }
    }
}
