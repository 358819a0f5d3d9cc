//! Scattering-induced entanglement of two colliding Gaussian wave packets and
//! its information-geometric description.
//!
//! The pre- and post-collision momentum densities are modelled as uncorrelated
//! and correlated bivariate Gaussians. Their Fisher–Rao geometry, geodesic flow
//! and information-geometric complexity (IGC) are related here to the s-wave
//! phase shift, the purity of the two-particle state and the entanglement
//! duration.
//!
//! Units: ħ = 1 throughout. Coordinates on both statistical manifolds are
//! ordered `(mu_k1, mu_k2, sigma)`.
//!
//! Every closed form has an independent brute-force counterpart in [`oracle`]
//! (quadrature, finite differences, extended precision).

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod cli;
pub mod complexity;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod models;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use models::{GaussianModelParams, MomentumPair};
pub use scattering::ScatteringConfig;
