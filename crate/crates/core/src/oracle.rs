//! Brute-force verifiers for the closed forms in [`geometry`](crate::geometry),
//! [`complexity`](crate::complexity) and [`scattering`](crate::scattering).
//!
//! Every oracle is built from the pdf, the metric it is handed, or plain
//! high-precision arithmetic, never from the formula it checks.

use astro_float::{BigFloat, Consts, RoundingMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::complexity::{self, domain_volume, GeodesicDomain};
use crate::error::{Error, Result};
use crate::geodesics;
use crate::geometry::{self, ChristoffelSymbols3, MetricTensor3, SIGMA};
use crate::models::{log_pdf, pdf, GaussianModelParams, MomentumPair};
use crate::quadrature::{integrate, integrate_scalar, CubatureOptions};
use crate::scattering::{self, ScatteringConfig};

pub const METRIC_TOL: f64 = 1e-7;
pub const CHRISTOFFEL_TOL: f64 = 1e-6;
pub const VOLUME_TOL: f64 = 1e-8;
pub const NORMALIZATION_TOL: f64 = 1e-8;
pub const PHASE_SHIFT_TOL: f64 = 1e-10;
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Half-width of the integration box, in units of sigma.
const PDF_SPAN: f64 = 10.0;
const PRECISION_BITS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub check_name: String,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub passed: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl OracleReport {
    /// Compares `analytic` against `oracle` entry by entry. Entries that are
    /// negligible next to the largest analytic entry are measured relative to
    /// that largest entry; an all-zero target falls back to absolute error.
    pub fn compare(
        name: impl Into<String>,
        analytic: &[f64],
        oracle: &[f64],
        tolerance: f64,
    ) -> Self {
        assert_eq!(analytic.len(), oracle.len());
        let scale = analytic.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut max_abs = 0.0f64;
        let mut max_rel = 0.0f64;
        for (&a, &o) in analytic.iter().zip(oracle) {
            let diff = (a - o).abs();
            let denom = if a.abs() > 1e-9 * scale {
                a.abs()
            } else {
                scale
            };
            let rel = if denom > 0.0 { diff / denom } else { diff };
            // NaN compares false: poison both maxima.
            max_abs = if diff.is_nan() {
                f64::NAN
            } else {
                max_abs.max(diff)
            };
            max_rel = if rel.is_nan() || max_rel.is_nan() {
                f64::NAN
            } else {
                max_rel.max(rel)
            };
        }
        Self {
            check_name: name.into(),
            max_abs_err: max_abs,
            max_rel_err: max_rel,
            passed: max_rel <= tolerance,
            tolerance,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        Self {
            check_name: name.into(),
            max_abs_err: f64::NAN,
            max_rel_err: f64::NAN,
            passed: false,
            tolerance,
            note: Some(err.to_string()),
        }
    }
}

/// Metric handed to the metric-derived oracles. `Perturbed` exists for fault
/// injection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MetricSource {
    #[default]
    Analytic,
    /// Analytic metric with `delta` added to `g_σσ`.
    Perturbed { delta: f64 },
}

impl MetricSource {
    pub fn metric(&self, params: &GaussianModelParams) -> MetricTensor3 {
        let mut g = geometry::fisher_metric(params);
        if let MetricSource::Perturbed { delta } = *self {
            g.entries[SIGMA][SIGMA] += delta;
        }
        g
    }

    fn metric_at(&self, theta: [f64; 3], r: f64) -> Result<MetricTensor3> {
        Ok(self.metric(&GaussianModelParams::from_theta(theta, r)?))
    }
}

fn step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

fn quadrature_options() -> CubatureOptions {
    CubatureOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-11,
        max_evals: 50_000_000,
    }
}

fn pdf_box(params: &GaussianModelParams) -> ([f64; 2], [f64; 2]) {
    let w = PDF_SPAN * params.sigma();
    (
        [params.mu_k1() - w, params.mu_k2() - w],
        [params.mu_k1() + w, params.mu_k2() + w],
    )
}

/// Score `d ln p / d theta_i` by a five-point central stencil.
fn score(params: &GaussianModelParams, k: MomentumPair) -> [f64; 3] {
    let theta = params.theta();
    let r = params.r();
    let lp = |t: [f64; 3]| {
        GaussianModelParams::from_theta(t, r)
            .map(|p| log_pdf(&p, k))
            .unwrap_or(f64::NAN)
    };
    std::array::from_fn(|i| {
        let h = step(theta[i]);
        let at = |m: f64| {
            let mut t = theta;
            t[i] += m * h;
            lp(t)
        };
        (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
    })
}

/// `g_ij = E[d_i ln p * d_j ln p]` by adaptive cubature over `mu +- 10 sigma`.
pub fn fisher_metric_quadrature(params: &GaussianModelParams) -> Result<MetricTensor3> {
    let (lo, hi) = pdf_box(params);
    let est = integrate(
        |k: &[f64; 2]| {
            let pair = MomentumPair::new(k[0], k[1]);
            let p = pdf(params, pair);
            if p == 0.0 {
                return [0.0; 6];
            }
            let s = score(params, pair);
            [
                p * s[0] * s[0],
                p * s[0] * s[1],
                p * s[0] * s[2],
                p * s[1] * s[1],
                p * s[1] * s[2],
                p * s[2] * s[2],
            ]
        },
        lo,
        hi,
        &quadrature_options(),
    )?;
    let v = est.value;
    Ok(MetricTensor3::new([
        [v[0], v[1], v[2]],
        [v[1], v[3], v[4]],
        [v[2], v[4], v[5]],
    ]))
}

/// Total mass and means of the pdf over `mu +- 10 sigma`.
pub fn pdf_moments(params: &GaussianModelParams) -> Result<[f64; 3]> {
    let (lo, hi) = pdf_box(params);
    let est = integrate(
        |k: &[f64; 2]| {
            let p = pdf(params, MomentumPair::new(k[0], k[1]));
            [p, p * k[0], p * k[1]]
        },
        lo,
        hi,
        &quadrature_options(),
    )?;
    Ok(est.value)
}

/// `Γ^k_{lm} = ½ g^{kn} (∂_l g_{nm} + ∂_m g_{nl} - ∂_n g_{lm})` with metric
/// derivatives from central differences of `source`.
pub fn christoffel_fd(
    params: &GaussianModelParams,
    source: MetricSource,
) -> Result<ChristoffelSymbols3> {
    let theta = params.theta();
    let r = params.r();
    let g = source.metric(params);
    let inv = g
        .inverse()
        .ok_or_else(|| Error::invalid("metric", g.determinant(), "singular metric"))?;
    let mut dg = [[[0.0; 3]; 3]; 3];
    for (n, slot) in dg.iter_mut().enumerate() {
        let h = step(theta[n]);
        let mut plus = theta;
        let mut minus = theta;
        plus[n] += h;
        minus[n] -= h;
        let (gp, gm) = (source.metric_at(plus, r)?, source.metric_at(minus, r)?);
        for i in 0..3 {
            for j in 0..3 {
                slot[i][j] = (gp.get(i, j) - gm.get(i, j)) / (2.0 * h);
            }
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            for m in 0..3 {
                gamma[k][l][m] = 0.5
                    * (0..3)
                        .map(|n| inv[k][n] * (dg[l][n][m] + dg[m][n][l] - dg[n][l][m]))
                        .sum::<f64>();
            }
        }
    }
    Ok(ChristoffelSymbols3 { gamma })
}

/// Integral of `sqrt(det g)` over the box by 3D adaptive cubature.
pub fn volume_quadrature(domain: &GeodesicDomain, r: f64, source: MetricSource) -> Result<f64> {
    domain.validate()?;
    let lo: [f64; 3] = std::array::from_fn(|i| domain.lower[i].min(domain.upper[i]));
    let hi: [f64; 3] = std::array::from_fn(|i| domain.lower[i].max(domain.upper[i]));
    if (0..3).any(|i| lo[i] == hi[i]) {
        return Ok(0.0);
    }
    GaussianModelParams::from_theta(lo, r)?;
    integrate_scalar(
        |theta: &[f64; 3]| {
            source
                .metric_at(*theta, r)
                .map(|g| g.determinant().sqrt())
                .unwrap_or(f64::NAN)
        },
        lo,
        hi,
        &CubatureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_evals: 50_000_000,
        },
    )
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION_BITS)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// Phase shift from `atan((k_out t - tan(k_out d)) / (1 + k_out tan(k_out d) t))`
/// evaluated in 256-bit arithmetic, `t = tan(k_in d) / k_in` (or the
/// `tanh` continuation above the barrier).
pub fn phase_shift_extended(cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    let p = PRECISION_BITS;
    let rm = RoundingMode::ToEven;
    let mut cc =
        Consts::new().map_err(|e| Error::Config(format!("arbitrary precision setup: {e:?}")))?;
    let two_mu = big(2.0).mul(&big(cfg.mu_reduced), p, rm);
    let k0 = big(cfg.k0);
    let d = big(cfg.d);
    let t_kin = k0.mul(&k0, p, rm).div(&two_mu, p, rm);
    let k_out = two_mu.mul(&t_kin, p, rm).sqrt(p, rm);
    let e = two_mu.mul(&t_kin.sub(&big(cfg.potential), p, rm), p, rm);
    let t = if e.is_zero() {
        d.clone()
    } else if e.is_positive() {
        let k_in = e.sqrt(p, rm);
        k_in.mul(&d, p, rm).tan(p, rm, &mut cc).div(&k_in, p, rm)
    } else {
        let kappa = e.neg().sqrt(p, rm);
        kappa.mul(&d, p, rm).tanh(p, rm, &mut cc).div(&kappa, p, rm)
    };
    let tan_out = k_out.mul(&d, p, rm).tan(p, rm, &mut cc);
    let num = k_out.mul(&t, p, rm).sub(&tan_out, p, rm);
    let den = big(1.0).add(&k_out.mul(&tan_out, p, rm).mul(&t, p, rm), p, rm);
    if den.is_zero() {
        return Err(Error::BranchBoundary { denominator: 0.0 });
    }
    let theta = num.div(&den, p, rm).atan(p, rm, &mut cc);
    Ok(to_f64(&theta))
}

/// One oracle-vs-analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleCase {
    Normalization { sigma: f64, r: f64 },
    Metric { sigma: f64, r: f64 },
    Christoffel { theta: [f64; 3], r: f64 },
    Volume { domain: GeodesicDomain, r: f64 },
    PhaseShift(ScatteringConfig),
}

impl OracleCase {
    pub fn name(&self) -> String {
        match self {
            OracleCase::Normalization { sigma, r } => format!("normalization sigma={sigma} r={r}"),
            OracleCase::Metric { sigma, r } => format!("fisher_metric sigma={sigma} r={r}"),
            OracleCase::Christoffel { theta, r } => {
                format!(
                    "christoffel theta=({},{},{}) r={r}",
                    theta[0], theta[1], theta[2]
                )
            }
            OracleCase::Volume { domain, r } => format!(
                "domain_volume ({},{},{})-({},{},{}) r={r}",
                domain.lower[0],
                domain.lower[1],
                domain.lower[2],
                domain.upper[0],
                domain.upper[1],
                domain.upper[2]
            ),
            OracleCase::PhaseShift(c) => format!(
                "phase_shift mu={} V={} d={} k0={}",
                c.mu_reduced, c.potential, c.d, c.k0
            ),
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            OracleCase::Normalization { .. } => NORMALIZATION_TOL,
            OracleCase::Metric { .. } => METRIC_TOL,
            OracleCase::Christoffel { .. } => CHRISTOFFEL_TOL,
            OracleCase::Volume { .. } => VOLUME_TOL,
            OracleCase::PhaseShift(_) => PHASE_SHIFT_TOL,
        }
    }

    pub fn run(&self, source: MetricSource) -> OracleReport {
        let name = self.name();
        let tol = self.tolerance();
        match self.evaluate(source) {
            Ok((analytic, oracle)) => OracleReport::compare(name, &analytic, &oracle, tol),
            Err(e) => OracleReport::failed(name, tol, &e),
        }
    }

    fn evaluate(&self, source: MetricSource) -> Result<(Vec<f64>, Vec<f64>)> {
        match *self {
            OracleCase::Normalization { sigma, r } => {
                let p = GaussianModelParams::new(0.3, -0.2, sigma, r)?;
                let m = pdf_moments(&p)?;
                // Means measured relative to the width so that mu = 0 is not special.
                Ok((
                    vec![1.0, 0.0, 0.0],
                    vec![
                        m[0],
                        (m[1] - p.mu_k1() * m[0]) / sigma,
                        (m[2] - p.mu_k2() * m[0]) / sigma,
                    ],
                ))
            }
            OracleCase::Metric { sigma, r } => {
                let p = GaussianModelParams::new(0.5, -1.0, sigma, r)?;
                let a = source.metric(&p);
                let q = fisher_metric_quadrature(&p)?;
                Ok((flatten(&a.entries), flatten(&q.entries)))
            }
            OracleCase::Christoffel { theta, r } => {
                let p = GaussianModelParams::from_theta(theta, r)?;
                let a = geometry::christoffel(&p);
                let fd = christoffel_fd(&p, source)?;
                Ok((flatten3(&a.gamma), flatten3(&fd.gamma)))
            }
            OracleCase::Volume { domain, r } => Ok((
                vec![domain_volume(&domain, r)?],
                vec![volume_quadrature(&domain, r, source)?],
            )),
            OracleCase::PhaseShift(cfg) => Ok((
                vec![scattering::phase_shift_exact(&cfg)?],
                vec![phase_shift_extended(&cfg)?],
            )),
        }
    }
}

fn flatten(m: &[[f64; 3]; 3]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

fn flatten3(m: &[[[f64; 3]; 3]; 3]) -> Vec<f64> {
    m.iter().flatten().flatten().copied().collect()
}

fn scattering_case(mu: f64, v: f64, d: f64, k0: f64) -> OracleCase {
    OracleCase::PhaseShift(ScatteringConfig {
        mu_reduced: mu,
        potential: v,
        d,
        k0,
        sigma0: 0.01,
        r0: 5.0,
        a_s: None,
    })
}

/// The default sweep:
/// - normalization for sigma in {0.1, 1, 10} and r in {0, 0.5, -0.9};
/// - metric for sigma in {0.1, 1, 10} and r in {0, ±0.5, ±0.9};
/// - Christoffel symbols on a 12-point grid of positions and correlations;
/// - box volumes for three boxes and r in {0, 0.5, 0.9};
/// - exact phase shifts for wells, barriers and the over-barrier case.
pub fn default_cases() -> Vec<OracleCase> {
    let mut cases = Vec::new();
    for sigma in [0.1, 1.0, 10.0] {
        for r in [0.0, 0.5, -0.9] {
            cases.push(OracleCase::Normalization { sigma, r });
        }
    }
    for sigma in [0.1, 1.0, 10.0] {
        for r in [0.0, 0.5, -0.5, 0.9, -0.9] {
            cases.push(OracleCase::Metric { sigma, r });
        }
    }
    for (theta, r) in [
        ([0.0, 0.0, 1.0], 0.0),
        ([0.0, 0.0, 2.0], 0.0),
        ([0.0, 0.0, 1.0], 0.5),
        ([1.5, -0.5, 0.2], 0.3),
        ([-2.0, 3.0, 5.0], -0.7),
        ([0.1, 0.1, 0.05], 0.9),
        ([10.0, -10.0, 3.0], -0.95),
        ([0.0, 1.0, 0.5], 0.01),
        ([-0.3, 0.7, 1.7], -0.2),
        ([4.0, 4.0, 0.8], 0.8),
        ([0.5, -0.5, 12.0], 0.0),
        ([-1.0, 2.0, 0.3], -0.5),
    ] {
        cases.push(OracleCase::Christoffel { theta, r });
    }
    let boxes = [
        GeodesicDomain {
            lower: [0.0, 0.0, 1.0],
            upper: [1.0, 1.0, 2.0],
        },
        GeodesicDomain {
            lower: [0.0, 0.0, 1.0],
            upper: [0.0, 1.0, 2.0],
        },
        GeodesicDomain {
            lower: [0.5, 1.0, 3.0],
            upper: [-1.0, -0.25, 0.4],
        },
    ];
    for domain in boxes {
        for r in [0.0, 0.5, 0.9] {
            cases.push(OracleCase::Volume { domain, r });
        }
    }
    for (mu, v, d, k0) in [
        (0.5, 0.01, 0.1, 1.0),
        (0.5, -0.01, 0.1, 1.0),
        (0.5, 0.5, 1.0, 1.0),
        (0.5, -0.4, 0.9, 1.0),
        (1.0, 2.0, 0.5, 1.0),
        (0.5, 1e-4, 0.01, 2.0),
        (2.0, 0.3, 0.05, 0.7),
    ] {
        cases.push(scattering_case(mu, v, d, k0));
    }
    cases
}

/// Runs every case in parallel; reports come back in input order. An empty
/// slice runs [`default_cases`].
pub fn run_all(cases: &[OracleCase], source: MetricSource) -> Vec<OracleReport> {
    let defaults;
    let cases = if cases.is_empty() {
        defaults = default_cases();
        &defaults[..]
    } else {
        cases
    };
    cases.par_iter().map(|c| c.run(source)).collect()
}

fn scalar_check(name: &str, expected: f64, got: Result<f64>, tol: f64) -> OracleReport {
    match got {
        Ok(v) => OracleReport::compare(name, &[expected], &[v], tol),
        Err(e) => OracleReport::failed(name, tol, &e),
    }
}

/// Cross-module identities that tie the scattering, complexity and geodesic
/// results together.
pub fn consistency_checks() -> Vec<OracleReport> {
    let base = ScatteringConfig {
        mu_reduced: 0.5,
        potential: 1e-5,
        d: 0.2,
        k0: 1.0,
        sigma0: 0.01,
        r0: 5.0,
        a_s: None,
    };
    let mut out = Vec::new();

    let low = scattering::purity_low_energy(&base);
    out.push(scalar_check(
        "purity_lowE = purity_general(theta_potential)",
        low,
        Ok(scattering::purity_general(
            &base,
            scattering::phase_shift_potential(&base),
        )),
        CONSISTENCY_TOL,
    ));

    let a_s = 1e-4;
    let with_a = ScatteringConfig {
        a_s: Some(a_s),
        ..base
    };
    out.push(scalar_check(
        "purity_general(-k0 a_s) = 1 - r_QM^2",
        scattering::r_qm(&with_a)
            .map(|r| 1.0 - r * r)
            .unwrap_or(f64::NAN),
        Ok(scattering::purity_general(
            &with_a,
            scattering::theta_from_scattering_length(base.k0, a_s),
        )),
        CONSISTENCY_TOL,
    ));

    let r = scattering::r_ig_from_potential(&base);
    out.push(scalar_check(
        "purity_from_complexity(ratio law) = purity_lowE",
        low,
        complexity::purity_from_complexity(&base, 1.0, complexity::predicted_ratio(r)),
        CONSISTENCY_TOL,
    ));
    out.push(scalar_check(
        "r_from_complexities(ratio law) = r",
        0.19,
        complexity::r_from_complexities(1.0, complexity::predicted_ratio(0.19)),
        CONSISTENCY_TOL,
    ));

    out.push(scalar_check(
        "theta_potential = theta_lowE(r_IG)",
        scattering::phase_shift_low_energy(r, base.d, base.k0),
        Ok(scattering::phase_shift_potential(&base)),
        1e-15,
    ));
    let w = scattering::wave_vectors(&base);
    if let scattering::WaveVectors::Propagating { k_in, k_out } = w {
        out.push(scalar_check(
            "k_in = sqrt(1 - r_IG) k_out",
            (1.0 - r).sqrt() * k_out,
            Ok(k_in),
            1e-15,
        ));
    }

    out.push(scalar_check(
        "r_upper_bound(sigma0/k0 = 1e-3) = 2e-6",
        2e-6,
        scattering::r_upper_bound(1.0, 1e-3),
        1e-5,
    ));
    let d0 = scattering::entanglement_duration(1.0, 1e-3, 0.0);
    out.push(OracleReport {
        passed: matches!(d0, Ok(v) if v == 0.0),
        ..scalar_check("entanglement_duration(r = 0) = 0", 0.0, d0, 0.0)
    });
    let dn = geodesics::duration_numeric(1.0, 0.1, 0.0, geodesics::DEFAULT_EPSILON);
    out.push(scalar_check("duration_numeric(r = 0) = 0", 0.0, dn, 1e-12));
    out
}
