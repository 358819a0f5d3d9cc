//! Geodesic flow on the uncorrelated and correlated Gaussian manifolds.
//!
//! The geodesic equations are integrated as a first-order system in
//! `(theta, theta_dot)` with the Dormand–Prince 5(4) pair. The local error is
//! measured in units of the local metric length scale `sigma`, which keeps the
//! step control invariant under the dilation `(mu, sigma) -> (l mu + b, l sigma)`
//! that is an isometry of both manifolds.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, inverse_correlation, MU1, MU2, SIGMA};
use crate::models::{check_correlation, GaussianModelParams};
use crate::ode::{self, OdeFailure, OdeSystem, StepControl};
use crate::scattering;

pub const CSV_HEADER: &str = "tau,mu_k1,mu_k2,sigma,dmu_k1,dmu_k2,dsigma,speed2";

/// Default relative band for [`momentum_attainment_time`].
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Position and velocity on a manifold at affine time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub tau: f64,
    pub theta: [f64; 3],
    pub velocity: [f64; 3],
}

impl GeodesicState {
    pub fn new(theta: [f64; 3], velocity: [f64; 3]) -> Self {
        Self {
            tau: 0.0,
            theta,
            velocity,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.theta[SIGMA]
    }

    fn to_vec(self) -> [f64; 6] {
        let [a, b, c] = self.theta;
        let [d, e, f] = self.velocity;
        [a, b, c, d, e, f]
    }

    fn from_vec(tau: f64, y: &[f64; 6]) -> Self {
        Self {
            tau,
            theta: [y[0], y[1], y[2]],
            velocity: [y[3], y[4], y[5]],
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma() > 0.0) || !self.sigma().is_finite() {
            return Err(Error::invalid(
                "sigma",
                self.sigma(),
                "must be finite and > 0",
            ));
        }
        if self
            .theta
            .iter()
            .chain(&self.velocity)
            .any(|v| !v.is_finite())
            || !self.tau.is_finite()
        {
            return Err(Error::invalid(
                "state",
                f64::NAN,
                "all components must be finite",
            ));
        }
        Ok(())
    }
}

/// Which statistical manifold a geodesic lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manifold {
    Uncorrelated,
    Correlated(f64),
}

impl Manifold {
    /// `r == 0` selects the uncorrelated manifold.
    pub fn from_r(r: f64) -> Result<Self> {
        check_correlation(r)?;
        Ok(if r == 0.0 {
            Manifold::Uncorrelated
        } else {
            Manifold::Correlated(r)
        })
    }

    pub fn r(&self) -> f64 {
        match *self {
            Manifold::Uncorrelated => 0.0,
            Manifold::Correlated(r) => r,
        }
    }

    fn acceleration(&self, theta: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
        let s = theta[SIGMA];
        let (m1, m2, ds) = (v[MU1], v[MU2], v[SIGMA]);
        let mean_term = match *self {
            Manifold::Uncorrelated => m1 * m1 + m2 * m2,
            Manifold::Correlated(r) => {
                let c = inverse_correlation(r);
                c[0][0] * m1 * m1 + 2.0 * c[0][1] * m1 * m2 + c[1][1] * m2 * m2
            }
        };
        [
            2.0 * m1 * ds / s,
            2.0 * m2 * ds / s,
            ds * ds / s - mean_term / (4.0 * s),
        ]
    }

    /// `g_ij v^i v^j` at `theta`.
    pub fn speed2(&self, theta: &[f64; 3], v: &[f64; 3]) -> f64 {
        let s2 = theta[SIGMA] * theta[SIGMA];
        let mean = match *self {
            Manifold::Uncorrelated => v[MU1] * v[MU1] + v[MU2] * v[MU2],
            Manifold::Correlated(r) => {
                let c = inverse_correlation(r);
                c[0][0] * v[MU1] * v[MU1]
                    + 2.0 * c[0][1] * v[MU1] * v[MU2]
                    + c[1][1] * v[MU2] * v[MU2]
            }
        };
        (mean + 4.0 * v[SIGMA] * v[SIGMA]) / s2
    }
}

/// Geodesic acceleration `-Γ^k_{lm} v^l v^m`:
/// `mu_a'' = 2 mu_a' sigma' / sigma`,
/// `sigma'' = sigma'^2 / sigma - mu'^T C^-1 mu' / (4 sigma)`.
pub fn geodesic_rhs(state: &GeodesicState, r: f64) -> Result<[f64; 3]> {
    state.validate()?;
    let manifold = Manifold::from_r(r)?;
    Ok(manifold.acceleration(&state.theta, &state.velocity))
}

/// Squared geodesic speed of `state` in the metric with correlation `r`.
pub fn speed2(state: &GeodesicState, r: f64) -> Result<f64> {
    let params = GaussianModelParams::from_theta(state.theta, r)?;
    Ok(geometry::fisher_metric(&params).inner(&state.velocity, &state.velocity))
}

struct Flow {
    manifold: Manifold,
    speed: f64,
}

impl OdeSystem<6> for Flow {
    fn rhs(&self, _t: f64, y: &[f64; 6]) -> [f64; 6] {
        let theta = [y[0], y[1], y[2]];
        let v = [y[3], y[4], y[5]];
        let a = self.manifold.acceleration(&theta, &v);
        [v[0], v[1], v[2], a[0], a[1], a[2]]
    }

    fn admissible(&self, y: &[f64; 6]) -> bool {
        y[2] > 0.0
    }

    fn error_scale(&self, y_old: &[f64; 6], y_new: &[f64; 6]) -> [f64; 6] {
        let s = y_old[2].abs().max(y_new[2].abs());
        let vs = self.speed * s;
        [s, s, s, vs, vs, vs]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicOptions {
    pub tol: f64,
    /// Upper bound on the step in tau; use it to force denser sampling.
    pub max_step: f64,
}

impl GeodesicOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_step: f64::INFINITY,
        }
    }

    fn control(&self) -> StepControl {
        StepControl {
            h_max: self.max_step,
            ..StepControl::new(self.tol)
        }
    }
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self::new(1e-10)
    }
}

/// Sampled geodesic. `speed_drift` is the largest relative deviation of the
/// squared speed from its initial value (absolute when the initial speed is 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub r: f64,
    pub samples: Vec<GeodesicState>,
    pub speed_drift: f64,
}

impl GeodesicPath {
    pub fn first(&self) -> &GeodesicState {
        &self.samples[0]
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples
            .last()
            .expect("path holds at least the initial state")
    }

    pub fn speed2_at(&self, index: usize) -> f64 {
        let s = &self.samples[index];
        manifold_for(self.r).speed2(&s.theta, &s.velocity)
    }

    /// Writes the path as CSV with [`CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.tau,
                s.theta[0],
                s.theta[1],
                s.theta[2],
                s.velocity[0],
                s.velocity[1],
                s.velocity[2],
                self.speed2_at(i)
            )?;
        }
        Ok(())
    }
}

fn manifold_for(r: f64) -> Manifold {
    if r == 0.0 {
        Manifold::Uncorrelated
    } else {
        Manifold::Correlated(r)
    }
}

fn integration_error(fail: OdeFailure<6>) -> Error {
    Error::Integration {
        reason: fail.kind.describe(),
        last_state: Box::new(GeodesicState::from_vec(fail.t, &fail.y)),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tol", tol, "must be finite and > 0"));
    }
    Ok(())
}

/// Integrates the geodesic through `initial` for `tau_max` units of affine time.
pub fn integrate_geodesic(
    initial: &GeodesicState,
    r: f64,
    tau_max: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    integrate_on(
        initial,
        Manifold::from_r(r)?,
        tau_max,
        &GeodesicOptions::new(tol),
    )
}

/// [`integrate_geodesic`] with an explicit manifold and step options.
pub fn integrate_on(
    initial: &GeodesicState,
    manifold: Manifold,
    tau_max: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicPath> {
    initial.validate()?;
    check_correlation(manifold.r())?;
    check_tol(opts.tol)?;
    if !(tau_max >= 0.0) || !tau_max.is_finite() {
        return Err(Error::invalid(
            "tau_max",
            tau_max,
            "must be finite and >= 0",
        ));
    }
    let speed0 = manifold.speed2(&initial.theta, &initial.velocity);
    let flow = Flow {
        manifold,
        speed: if speed0 > 0.0 { speed0.sqrt() } else { 1.0 },
    };
    let mut samples = vec![*initial];
    let mut drift = 0.0f64;
    let t0 = initial.tau;
    ode::integrate(
        &flow,
        t0,
        initial.to_vec(),
        t0 + tau_max,
        &opts.control(),
        |t, y| {
            let s = GeodesicState::from_vec(t, y);
            let sp = manifold.speed2(&s.theta, &s.velocity);
            let dev = (sp - speed0).abs();
            drift = drift.max(if speed0 > 0.0 { dev / speed0 } else { dev });
            samples.push(s);
        },
    )
    .map_err(integration_error)?;
    Ok(GeodesicPath {
        r: manifold.r(),
        samples,
        speed_drift: drift,
    })
}

/// State reached after `dt` units of affine time from `from`.
fn advance(
    from: &GeodesicState,
    manifold: Manifold,
    dt: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicState> {
    let speed0 = manifold.speed2(&from.theta, &from.velocity);
    let flow = Flow {
        manifold,
        speed: if speed0 > 0.0 { speed0.sqrt() } else { 1.0 },
    };
    let y = ode::integrate(
        &flow,
        from.tau,
        from.to_vec(),
        from.tau + dt,
        &opts.control(),
        |_, _| {},
    )
    .map_err(integration_error)?;
    Ok(GeodesicState::from_vec(from.tau + dt, &y))
}

#[derive(Debug, Clone, Copy)]
pub struct AttainmentOptions {
    pub tau_max: f64,
    pub geodesic: GeodesicOptions,
}

impl Default for AttainmentOptions {
    fn default() -> Self {
        Self {
            tau_max: 200.0,
            geodesic: GeodesicOptions::new(1e-11),
        }
    }
}

/// First affine time at which `mu_k1` enters the band
/// `|mu_k1 - target| <= epsilon |target|`, refined by bisection between the
/// bracketing integrator samples. Times are measured from `initial.tau`.
pub fn momentum_attainment_time(
    initial: &GeodesicState,
    manifold: Manifold,
    target: f64,
    epsilon: f64,
    opts: &AttainmentOptions,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::invalid("epsilon", epsilon, "must lie in (0, 0.1]"));
    }
    if !target.is_finite() {
        return Err(Error::invalid("target", target, "must be finite"));
    }
    initial.validate()?;
    check_correlation(manifold.r())?;
    check_tol(opts.geodesic.tol)?;
    let band = epsilon * target.abs();
    let gap = |s: &[f64; 6]| (s[0] - target).abs() - band;
    if gap(&initial.to_vec()) <= 0.0 {
        return Ok(0.0);
    }

    let speed0 = manifold.speed2(&initial.theta, &initial.velocity);
    let flow = Flow {
        manifold,
        speed: if speed0 > 0.0 { speed0.sqrt() } else { 1.0 },
    };
    let mut previous = *initial;
    let t0 = initial.tau;
    let (t_hit, y_hit) = ode::integrate_until(
        &flow,
        t0,
        initial.to_vec(),
        t0 + opts.tau_max,
        &opts.geodesic.control(),
        |t, y| {
            if gap(y) <= 0.0 {
                true
            } else {
                previous = GeodesicState::from_vec(t, y);
                false
            }
        },
    )
    .map_err(integration_error)?;
    if gap(&y_hit) > 0.0 {
        return Err(Error::NotReached {
            target,
            tau_max: opts.tau_max,
        });
    }

    // gap > 0 at `previous`, <= 0 at t_hit.
    let mut lo = 0.0;
    let mut hi = t_hit - previous.tau;
    while hi - lo > 1e-13 * (previous.tau - t0 + hi).max(1.0) {
        let mid = 0.5 * (lo + hi);
        let s = advance(&previous, manifold, mid, &opts.geodesic)?;
        if gap(&s.to_vec()) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(previous.tau + hi - t0)
}

/// Initial state of the head-on reference geodesic.
///
/// Both means start at rest, `theta(0) = (0, 0, sigma0)`, and move
/// antisymmetrically (`mu_k2 = -mu_k1`) with unit speed. On the uncorrelated
/// manifold the path is the hyperbolic semicircle along which `mu_k1` tends to
/// `mu_end` as `sigma -> 0`. On a correlated manifold the mean velocity is
/// scaled by `sqrt(1 - r)`: the squared speed and the whole `sigma(tau)` profile
/// then coincide with the uncorrelated run, and every mean excursion is
/// `sqrt(1 - r)` times the uncorrelated one.
pub fn head_on_initial_state(sigma0: f64, mu_end: f64, r: f64) -> Result<GeodesicState> {
    if !(sigma0 > 0.0) || !sigma0.is_finite() {
        return Err(Error::invalid("sigma0", sigma0, "must be finite and > 0"));
    }
    if !(mu_end > 0.0) || !mu_end.is_finite() {
        return Err(Error::invalid("mu_end", mu_end, "must be finite and > 0"));
    }
    check_correlation(r)?;
    if r < 0.0 {
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: 0.0,
            upper: 1.0,
        });
    }
    // Half-plane coordinates x = sqrt(2) mu_k1, y = 2 sigma, in which the
    // uncorrelated metric restricted to the antisymmetric plane reads
    // 4 (dx^2 + dy^2) / y^2.
    let x_end = std::f64::consts::SQRT_2 * mu_end;
    let y0 = 2.0 * sigma0;
    let centre = (x_end * x_end - y0 * y0) / (2.0 * x_end);
    let radius = x_end - centre;
    let dx = y0 * y0 / (2.0 * radius);
    let dy = centre * y0 / (2.0 * radius);
    let dmu = dx / std::f64::consts::SQRT_2 * (1.0 - r).sqrt();
    Ok(GeodesicState::new(
        [0.0, 0.0, sigma0],
        [dmu, -dmu, 0.5 * dy],
    ))
}

/// Numerical entanglement duration `tau_corr - tau_uncorr`.
///
/// Both runs start from the head-on reference state whose uncorrelated
/// `mu_k1` asymptote sits at `k0 (1 + 1 / eta_delta)`. Each run must bring
/// `mu_k1` within `epsilon k0` of `k0`; on the correlated manifold the mean
/// excursion is reduced by `sqrt(1 - r)`, so the correlated run has a momentum
/// gap to close.
pub fn duration_numeric(k0: f64, sigma0: f64, r: f64, epsilon: f64) -> Result<f64> {
    duration_numeric_with(k0, sigma0, r, epsilon, &AttainmentOptions::default())
}

pub fn duration_numeric_with(
    k0: f64,
    sigma0: f64,
    r: f64,
    epsilon: f64,
    opts: &AttainmentOptions,
) -> Result<f64> {
    let bound = scattering::r_upper_bound(k0, sigma0)?;
    if !(r >= 0.0 && r < bound) {
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: 0.0,
            upper: bound,
        });
    }
    let mu_end = k0 * (1.0 + 1.0 / scattering::eta_delta(k0, sigma0)?);
    let uncorr = head_on_initial_state(sigma0, mu_end, 0.0)?;
    let corr = head_on_initial_state(sigma0, mu_end, r)?;
    let tau_uncorr = momentum_attainment_time(&uncorr, Manifold::Uncorrelated, k0, epsilon, opts)?;
    let tau_corr = momentum_attainment_time(&corr, Manifold::from_r(r)?, k0, epsilon, opts)?;
    Ok(tau_corr - tau_uncorr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn state(theta: [f64; 3], v: [f64; 3]) -> GeodesicState {
        GeodesicState::new(theta, v)
    }

    #[test]
    fn rhs_reference_values() {
        assert_eq!(
            geodesic_rhs(&state([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]), 0.0).unwrap(),
            [0.0, 0.0, 1.0]
        );
        assert_eq!(
            geodesic_rhs(&state([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]), 0.0).unwrap(),
            [0.0, 0.0, -0.25]
        );
        let a = geodesic_rhs(&state([0.0, 0.0, 1.0], [1.0, 1.0, 0.0]), 0.5).unwrap();
        assert_relative_eq!(a[2], -1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(&a[..2], &[0.0, 0.0]);
    }

    #[test]
    fn rhs_matches_christoffel_contraction() {
        for (theta, v, r) in [
            ([0.3, -1.0, 0.7], [0.2, -0.5, 0.1], 0.0),
            ([1.0, 2.0, 2.0], [1.0, 0.4, -0.3], 0.6),
            ([0.0, 0.0, 0.2], [-0.1, 0.9, 0.05], -0.3),
        ] {
            let a = geodesic_rhs(&state(theta, v), r).unwrap();
            let gamma = geometry::christoffel(&GaussianModelParams::from_theta(theta, r).unwrap());
            let b = gamma.contract(&v);
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-14 * b[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rhs_rejects_bad_sigma() {
        assert!(geodesic_rhs(&state([0.0, 0.0, 0.0], [0.0; 3]), 0.0).is_err());
        assert!(geodesic_rhs(&state([0.0, 0.0, -1.0], [0.0; 3]), 0.0).is_err());
    }

    #[test]
    fn pure_sigma_closed_form() {
        let p =
            integrate_geodesic(&state([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]), 0.0, 1.0, 1e-10).unwrap();
        let last = p.last();
        assert_eq!(last.tau, 1.0);
        assert!((last.sigma() - std::f64::consts::E).abs() < 1e-8);
        assert_eq!(&last.theta[..2], &[0.0, 0.0]);

        let p =
            integrate_geodesic(&state([0.0, 0.0, 1.0], [0.0, 0.0, -0.5]), 0.0, 1.0, 1e-10).unwrap();
        assert!((p.last().sigma() - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn zero_horizon_returns_initial() {
        let s0 = state([0.4, 0.1, 2.0], [1.0, -1.0, 0.3]);
        let p = integrate_geodesic(&s0, 0.2, 0.0, 1e-10).unwrap();
        assert_eq!(p.samples, vec![s0]);
        assert_eq!(p.speed_drift, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let s0 = state([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);
        assert!(integrate_geodesic(&s0, 0.0, -1.0, 1e-10).is_err());
        assert!(integrate_geodesic(&s0, 0.0, 1.0, 0.0).is_err());
        assert!(integrate_geodesic(&s0, 0.9995, 1.0, 1e-10).is_err());
    }

    #[test]
    fn mean_velocity_over_sigma_squared_is_conserved() {
        let s0 = state([0.5, -0.5, 1.0], [0.7, 0.2, 0.4]);
        let p = integrate_geodesic(&s0, 0.3, 5.0, 1e-10).unwrap();
        let c0 = [s0.velocity[0] / 1.0, s0.velocity[1] / 1.0];
        for s in &p.samples {
            let s2 = s.sigma() * s.sigma();
            assert_relative_eq!(s.velocity[0] / s2, c0[0], max_relative = 1e-8);
            assert_relative_eq!(s.velocity[1] / s2, c0[1], max_relative = 1e-8);
        }
        assert!(p.speed_drift < 1e-8);
    }

    #[test]
    fn stationary_means_stay_fixed() {
        for r in [0.0, 0.4, -0.8] {
            let s0 = state([1.25, -3.5, 0.8], [0.0, 0.0, 0.6]);
            let p = integrate_geodesic(&s0, r, 4.0, 1e-10).unwrap();
            for s in &p.samples {
                assert!((s.theta[0] - 1.25).abs() <= 1e-14);
                assert!((s.theta[1] + 3.5).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn correlated_at_zero_matches_uncorrelated() {
        let s0 = state([0.2, 0.4, 0.9], [0.6, -0.3, -0.2]);
        let opts = GeodesicOptions::new(1e-10);
        let a = integrate_on(&s0, Manifold::Uncorrelated, 6.0, &opts).unwrap();
        let b = integrate_on(&s0, Manifold::Correlated(0.0), 6.0, &opts).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.tau - y.tau).abs() <= 1e-12);
            for k in 0..3 {
                assert!((x.theta[k] - y.theta[k]).abs() <= 1e-12);
                assert!((x.velocity[k] - y.velocity[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        for r in [0.0, 0.5] {
            let s0 = state([0.3, -0.2, 1.1], [0.5, 0.8, -0.3]);
            let fwd = integrate_geodesic(&s0, r, 5.0, 1e-10).unwrap();
            let end = fwd.last();
            let back = GeodesicState::new(end.theta, end.velocity.map(|v| -v));
            let rev = integrate_geodesic(&back, r, 5.0, 1e-10).unwrap();
            let fin = rev.last();
            for k in 0..3 {
                assert!((fin.theta[k] - s0.theta[k]).abs() < 1e-7, "r={r} k={k}");
                assert!((fin.velocity[k] + s0.velocity[k]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let p =
            integrate_geodesic(&state([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]), 0.0, 0.5, 1e-10).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 4.0]);
        assert_eq!(text.lines().count(), p.samples.len() + 1);
    }

    #[test]
    fn head_on_state_properties() {
        let u = head_on_initial_state(0.1, 1.0, 0.0).unwrap();
        assert_relative_eq!(
            Manifold::Uncorrelated.speed2(&u.theta, &u.velocity),
            1.0,
            max_relative = 1e-14
        );
        let c = head_on_initial_state(0.1, 1.0, 0.3).unwrap();
        assert_relative_eq!(
            Manifold::Correlated(0.3).speed2(&c.theta, &c.velocity),
            1.0,
            max_relative = 1e-14
        );
        assert_eq!(u.velocity[2], c.velocity[2]);

        // mu_k1 tends to mu_end along the uncorrelated run.
        let p = integrate_geodesic(&u, 0.0, 40.0, 1e-11).unwrap();
        assert!((p.last().theta[0] - 1.0).abs() < 1e-9);
        assert!((p.last().theta[1] + 1.0).abs() < 1e-9);

        assert!(head_on_initial_state(0.1, 1.0, -0.1).is_err());
        assert!(head_on_initial_state(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn attainment_trivial_and_unreachable() {
        let s0 = state([2.0, -2.0, 0.5], [0.1, -0.1, 0.0]);
        let opts = AttainmentOptions::default();
        assert_eq!(
            momentum_attainment_time(&s0, Manifold::Uncorrelated, 2.0, 1e-3, &opts).unwrap(),
            0.0
        );
        let u = head_on_initial_state(0.1, 1.0, 0.0).unwrap();
        let short = AttainmentOptions {
            tau_max: 30.0,
            ..opts
        };
        let err =
            momentum_attainment_time(&u, Manifold::Uncorrelated, 1.5, 1e-3, &short).unwrap_err();
        assert!(matches!(err, Error::NotReached { .. }));
        assert!(momentum_attainment_time(&u, Manifold::Uncorrelated, 1.0, 0.0, &opts).is_err());
        assert!(momentum_attainment_time(&u, Manifold::Uncorrelated, 1.0, 0.2, &opts).is_err());
    }

    #[test]
    fn attainment_time_hits_the_band_edge() {
        let u = head_on_initial_state(0.05, 1.01, 0.0).unwrap();
        let opts = AttainmentOptions::default();
        let tau = momentum_attainment_time(&u, Manifold::Uncorrelated, 1.0, 1e-3, &opts).unwrap();
        assert!(tau > 0.0);
        let at = integrate_on(&u, Manifold::Uncorrelated, tau, &opts.geodesic).unwrap();
        assert!((at.last().theta[0] - 0.999).abs() < 1e-9);
    }

    #[test]
    fn correlated_run_is_slower() {
        let mu_end = 1.0 + 1e-2;
        let u = head_on_initial_state(0.1, mu_end, 0.0).unwrap();
        let c = head_on_initial_state(0.1, mu_end, 0.01).unwrap();
        let opts = AttainmentOptions::default();
        let tu = momentum_attainment_time(&u, Manifold::Uncorrelated, 1.0, 1e-3, &opts).unwrap();
        let tc =
            momentum_attainment_time(&c, Manifold::Correlated(0.01), 1.0, 1e-3, &opts).unwrap();
        assert!(tu.is_finite() && tc >= tu, "tu={tu} tc={tc}");
    }

    #[test]
    fn duration_limits_and_monotonicity() {
        assert_eq!(duration_numeric(1.0, 0.1, 0.0, 1e-3).unwrap(), 0.0);
        let rs = [1e-4, 1e-3, 5e-3, 1e-2];
        let d: Vec<f64> = rs
            .iter()
            .map(|&r| duration_numeric(1.0, 0.1, r, 1e-3).unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[1] >= w[0]), "{d:?}");
        assert!(d[0] > 0.0);
        assert!(duration_numeric(1.0, 0.1, 0.03, 1e-3).is_err());
        assert!(duration_numeric(1.0, 0.1, -1e-3, 1e-3).is_err());
    }

    #[test]
    fn duration_grows_as_width_ratio_shrinks() {
        let wide = duration_numeric(1.0, 1e-1, 1e-4, 1e-3).unwrap();
        let mid = duration_numeric(1.0, 1e-2, 1e-4, 1e-3).unwrap();
        let narrow = duration_numeric(1.0, 1e-3, 1e-6, 1e-3).unwrap();
        let narrow_same_r = duration_numeric(1.0, 1e-2, 1e-6, 1e-3).unwrap();
        assert!(mid >= wide, "wide={wide} mid={mid}");
        assert!(
            narrow >= narrow_same_r,
            "narrow={narrow} ref={narrow_same_r}"
        );
    }
}
