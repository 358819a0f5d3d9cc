//! Information-geometric complexity: time-averaged volumes of the parameter
//! region swept out by a geodesic.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::{
    head_on_initial_state, integrate_on, GeodesicOptions, GeodesicPath, Manifold,
};
use crate::geometry::{MU1, MU2, SIGMA};
use crate::models::check_correlation;
use crate::scattering::{r_ig_from_potential, ScatteringConfig};

/// Box spanned by two manifold points. The corners need not be ordered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicDomain {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl GeodesicDomain {
    pub fn new(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        let d = Self { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma lower", self.lower[SIGMA]),
            ("sigma upper", self.upper[SIGMA]),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite and > 0"));
            }
        }
        if self.lower.iter().chain(&self.upper).any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "domain",
                f64::NAN,
                "all bounds must be finite",
            ));
        }
        Ok(())
    }
}

/// Fisher volume of the box:
/// `|d mu_k1| |d mu_k2| |1/sigma_lo^2 - 1/sigma_hi^2| / sqrt(1 - r^2)`.
pub fn domain_volume(domain: &GeodesicDomain, r: f64) -> Result<f64> {
    domain.validate()?;
    check_correlation(r)?;
    let (l, u) = (&domain.lower, &domain.upper);
    let dmu1 = (u[MU1] - l[MU1]).abs();
    let dmu2 = (u[MU2] - l[MU2]).abs();
    let ds = (1.0 / (l[SIGMA] * l[SIGMA]) - 1.0 / (u[SIGMA] * u[SIGMA])).abs();
    Ok(dmu1 * dmu2 * ds / (1.0 - r * r).sqrt())
}

/// Time-averaged volume with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IgcEstimate {
    pub value: f64,
    /// `|T_h - T_2h| / 3` from the trapezoid rule on all samples versus every
    /// other sample.
    pub error: f64,
}

fn trapezoid(tau: &[f64], f: &[f64], stride: usize) -> f64 {
    let idx: Vec<usize> = (0..tau.len())
        .step_by(stride)
        .chain(std::iter::once(tau.len() - 1))
        .collect();
    let mut acc = 0.0;
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a != b {
            acc += 0.5 * (tau[b] - tau[a]) * (f[a] + f[b]);
        }
    }
    acc
}

/// IGC of a path, `(1/tau) * integral of vol[D(tau')] d tau'`, with the
/// Richardson-extrapolated trapezoid rule over the path samples.
pub fn igc_estimate(path: &GeodesicPath, r: f64) -> Result<IgcEstimate> {
    if path.samples.len() < 2 {
        return Err(Error::Config(
            "complexity needs a path with at least two samples".into(),
        ));
    }
    let origin = path.first();
    let span = path.last().tau - origin.tau;
    if !(span > 0.0) {
        return Err(Error::invalid(
            "tau",
            span,
            "path must cover a positive span",
        ));
    }
    let tau: Vec<f64> = path.samples.iter().map(|s| s.tau).collect();
    let vol = path
        .samples
        .iter()
        .map(|s| domain_volume(&GeodesicDomain::new(origin.theta, s.theta)?, r))
        .collect::<Result<Vec<_>>>()?;
    let fine = trapezoid(&tau, &vol, 1);
    if tau.len() < 3 {
        return Ok(IgcEstimate {
            value: fine / span,
            error: f64::NAN,
        });
    }
    let coarse = trapezoid(&tau, &vol, 2);
    let correction = (fine - coarse) / 3.0;
    Ok(IgcEstimate {
        value: (fine + correction) / span,
        error: correction.abs() / span,
    })
}

pub fn igc(path: &GeodesicPath, r: f64) -> Result<f64> {
    igc_estimate(path, r).map(|e| e.value)
}

#[derive(Debug, Clone, Copy)]
pub struct ComplexityOptions {
    /// Affine time of each run. Long enough for the mean excursions to settle.
    pub horizon: f64,
    pub geodesic: GeodesicOptions,
}

impl Default for ComplexityOptions {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            geodesic: GeodesicOptions {
                tol: 1e-11,
                max_step: 0.01,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub c_uncorr: f64,
    pub c_corr: f64,
    pub ratio: f64,
    pub predicted_ratio: f64,
    pub r_recovered: f64,
}

/// `sqrt((1 - r) / (1 + r))`.
pub fn predicted_ratio(r: f64) -> f64 {
    ((1.0 - r) / (1.0 + r)).sqrt()
}

pub fn complexity_ratio(cfg: &ScatteringConfig) -> Result<ComplexityReport> {
    complexity_ratio_with(cfg, &ComplexityOptions::default())
}

/// Complexities of the matched head-on pair with `r = r_IG(cfg)`: both runs
/// start at `(0, 0, sigma0)` heading for the mean asymptote `k0`, the
/// correlated one with mean excursions scaled by `sqrt(1 - r)`.
pub fn complexity_ratio_with(
    cfg: &ScatteringConfig,
    opts: &ComplexityOptions,
) -> Result<ComplexityReport> {
    cfg.validate()?;
    let r = r_ig_from_potential(cfg);
    if !(0.0..1.0).contains(&r) {
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: 0.0,
            upper: 1.0,
        });
    }
    let manifold = Manifold::from_r(r)?;
    let run = |manifold: Manifold| -> Result<f64> {
        let start = head_on_initial_state(cfg.sigma0, cfg.k0, manifold.r())?;
        let path = integrate_on(&start, manifold, opts.horizon, &opts.geodesic)?;
        igc(&path, manifold.r())
    };
    let (c_uncorr, c_corr) = join(|| run(Manifold::Uncorrelated), || run(manifold));
    let (c_uncorr, c_corr) = (c_uncorr?, c_corr?);
    Ok(ComplexityReport {
        c_uncorr,
        c_corr,
        ratio: c_corr / c_uncorr,
        predicted_ratio: predicted_ratio(r),
        r_recovered: r_from_complexities(c_uncorr, c_corr)?,
    })
}

/// `(c_u^2 - c_c^2) / (c_u^2 + c_c^2)`.
pub fn r_from_complexities(c_uncorr: f64, c_corr: f64) -> Result<f64> {
    if !(c_uncorr > 0.0) || !c_uncorr.is_finite() {
        return Err(Error::invalid(
            "c_uncorr",
            c_uncorr,
            "must be finite and > 0",
        ));
    }
    if !(c_corr >= 0.0) || !c_corr.is_finite() {
        return Err(Error::invalid("c_corr", c_corr, "must be finite and >= 0"));
    }
    let (u2, c2) = (c_uncorr * c_uncorr, c_corr * c_corr);
    Ok((u2 - c2) / (u2 + c2))
}

/// `eta_C = (8/3) k0^2 (2 k0^2 + sigma0^2) R0 d^3`.
pub fn eta_c(k0: f64, sigma0: f64, r0: f64, d: f64) -> f64 {
    (8.0 / 3.0) * k0 * k0 * (2.0 * k0 * k0 + sigma0 * sigma0) * r0 * d.powi(3)
}

/// `P = 1 - eta_C * (c_u^2 - c_c^2) / (c_u^2 + c_c^2)`.
pub fn purity_from_complexity(cfg: &ScatteringConfig, c_uncorr: f64, c_corr: f64) -> Result<f64> {
    cfg.validate()?;
    let r = r_from_complexities(c_uncorr, c_corr)?;
    Ok(1.0 - eta_c(cfg.k0, cfg.sigma0, cfg.r0, cfg.d) * r)
}
