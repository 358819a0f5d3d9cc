//! s-wave scattering off a square barrier/well of height `V` and range `d`,
//! and the entanglement measures built on it.
//!
//! Units: ħ = 1. The relative kinetic energy is `T = k0^2 / (2 mu)` with
//! `mu = m / 2` the reduced mass.

use std::f64::consts::PI;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `k0 d` above this is outside the low-energy regime.
pub const LOW_ENERGY_MAX_KD: f64 = 0.1;
/// `|r_IG|` above this is outside the weak-correlation regime.
pub const WEAK_CORRELATION_MAX_R: f64 = 0.1;
/// `r_QM` at or above this triggers a warning.
pub const R_QM_WARN: f64 = 0.1;
/// Purity deficits above this are beyond the first-order expansion.
pub const PURITY_TRUNCATION_WARN: f64 = 0.1;
/// `eta_delta` is only trusted for `sigma0 / k0` below this.
pub const ETA_SERIES_LIMIT: f64 = 0.3;

/// Physical inputs of a collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringConfig {
    pub mu_reduced: f64,
    /// Potential height (> 0, repulsive) or depth (< 0, attractive).
    #[serde(rename = "V")]
    pub potential: f64,
    pub d: f64,
    pub k0: f64,
    pub sigma0: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_s: Option<f64>,
}

impl ScatteringConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_reduced", self.mu_reduced),
            ("d", self.d),
            ("k0", self.k0),
            ("sigma0", self.sigma0),
            ("R0", self.r0),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::invalid(name, value, "must be finite and > 0"));
            }
        }
        if !self.potential.is_finite() {
            return Err(Error::invalid("V", self.potential, "must be finite"));
        }
        if let Some(a) = self.a_s {
            if !a.is_finite() {
                return Err(Error::invalid("a_s", a, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Relative kinetic energy `T = k0^2 / (2 mu)`.
    pub fn kinetic_energy(&self) -> f64 {
        self.k0 * self.k0 / (2.0 * self.mu_reduced)
    }

    /// Sets `V` so that `r_IG = 2 mu V / k0^2` equals `r`.
    pub fn with_r_ig(mut self, r: f64) -> Self {
        self.potential = r * self.kinetic_energy();
        self
    }

    /// Scattering length, falling back to `-theta0 / k0` from the exact phase shift.
    pub fn scattering_length(&self) -> Result<f64> {
        match self.a_s {
            Some(a) => Ok(a),
            None => Ok(scattering_length_from_theta(
                self.k0,
                phase_shift_exact(self)?,
            )),
        }
    }
}

/// Wave numbers inside (`k_in`) and outside (`k_out`) the potential region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveVectors {
    Propagating {
        k_in: f64,
        k_out: f64,
    },
    /// `V >= T`: the inside solution decays with `kappa = sqrt(2 mu (V - T))`.
    Evanescent {
        kappa: f64,
        k_out: f64,
    },
}

impl WaveVectors {
    pub fn k_out(&self) -> f64 {
        match *self {
            WaveVectors::Propagating { k_out, .. } | WaveVectors::Evanescent { k_out, .. } => k_out,
        }
    }
}

pub fn wave_vectors(cfg: &ScatteringConfig) -> WaveVectors {
    let t = cfg.kinetic_energy();
    let k_out = (2.0 * cfg.mu_reduced * t).sqrt();
    if cfg.potential < t {
        WaveVectors::Propagating {
            k_in: (2.0 * cfg.mu_reduced * (t - cfg.potential)).sqrt(),
            k_out,
        }
    } else {
        WaveVectors::Evanescent {
            kappa: (2.0 * cfg.mu_reduced * (cfg.potential - t)).sqrt(),
            k_out,
        }
    }
}

/// `r_IG = V / T = 2 mu V / k0^2`; negative for an attractive well.
pub fn r_ig_from_potential(cfg: &ScatteringConfig) -> f64 {
    2.0 * cfg.mu_reduced * cfg.potential / (cfg.k0 * cfg.k0)
}

/// `r_QM = sqrt(8 (2 k0^2 + sigma0^2) R0 a_s)`.
pub fn r_qm_from(k0: f64, sigma0: f64, r0: f64, a_s: f64) -> Result<f64> {
    let radicand = 8.0 * (2.0 * k0 * k0 + sigma0 * sigma0) * r0 * a_s;
    if !(radicand >= 0.0) {
        return Err(Error::invalid(
            "a_s",
            a_s,
            "8 (2 k0^2 + sigma0^2) R0 a_s must be >= 0",
        ));
    }
    let r = radicand.sqrt();
    if r >= R_QM_WARN {
        warn!("r_QM = {r} is not small; the post-collision density assumes r_QM << 1");
    }
    Ok(r)
}

pub fn r_qm(cfg: &ScatteringConfig) -> Result<f64> {
    let a_s = cfg
        .a_s
        .ok_or_else(|| Error::Config("r_QM needs the scattering length a_s".into()))?;
    r_qm_from(cfg.k0, cfg.sigma0, cfg.r0, a_s)
}

// Taylor coefficients of tan(x)/x - 1 in powers of s = x^2.
const TAN_SERIES: [f64; 7] = [
    1.0 / 3.0,
    2.0 / 15.0,
    17.0 / 315.0,
    62.0 / 2835.0,
    1382.0 / 155925.0,
    21844.0 / 6081075.0,
    929569.0 / 638512875.0,
];

/// `tan(x)/x - 1` as a function of `s = x^2`, continued to `s < 0` as
/// `tanh(|x|)/|x| - 1`. Accurate to a few ulps near `s = 0`.
fn tan_ratio_m1(s: f64) -> f64 {
    if s.abs() < 1e-2 {
        TAN_SERIES.iter().rev().fold(0.0, |acc, c| (acc + c) * s)
    } else if s > 0.0 {
        let x = s.sqrt();
        x.tan() / x - 1.0
    } else {
        let x = (-s).sqrt();
        x.tanh() / x - 1.0
    }
}

/// Exact s-wave phase shift from matching the inside and outside solutions at
/// `x = d`, on the principal branch `(-pi/2, pi/2)`.
///
/// With `t = tan(k_in d) / k_in`:
/// `tan theta0 = (k_out t - tan(k_out d)) / (1 + k_out tan(k_out d) t)`.
/// Above the barrier top (`V >= T`) `t` continues to `tanh(kappa d) / kappa`.
/// The numerator is evaluated as `k_out d (u_in - u_out)` with
/// `u = tan(x)/x - 1`, which avoids cancellation when `k d` is small.
pub fn phase_shift_exact(cfg: &ScatteringConfig) -> Result<f64> {
    let w = wave_vectors(cfg);
    let k_out = w.k_out();
    let s_in = match w {
        WaveVectors::Propagating { k_in, .. } => (k_in * cfg.d).powi(2),
        WaveVectors::Evanescent { kappa, .. } => -(kappa * cfg.d).powi(2),
    };
    let x_out = k_out * cfg.d;
    let (u_in, u_out) = (tan_ratio_m1(s_in), tan_ratio_m1(x_out * x_out));
    let numerator = x_out * (u_in - u_out);
    let denominator = 1.0 + x_out.tan() * x_out * (1.0 + u_in);
    let ratio = numerator / denominator;
    if denominator == 0.0 || !ratio.is_finite() {
        return Err(Error::BranchBoundary { denominator });
    }
    Ok(ratio.atan())
}

/// Low-energy, weak-correlation phase shift `-(1/3) r d^3 k0^3`.
pub fn phase_shift_low_energy(r: f64, d: f64, k0: f64) -> f64 {
    -(1.0 / 3.0) * r * d.powi(3) * k0.powi(3)
}

/// Phase shift in terms of the potential, `-(2/3) mu V d^3 k0`.
pub fn phase_shift_potential(cfg: &ScatteringConfig) -> f64 {
    -(2.0 / 3.0) * cfg.mu_reduced * cfg.potential * cfg.d.powi(3) * cfg.k0
}

/// `theta0 = -k0 a_s`.
pub fn theta_from_scattering_length(k0: f64, a_s: f64) -> f64 {
    -k0 * a_s
}

pub fn scattering_length_from_theta(k0: f64, theta0: f64) -> f64 {
    -theta0 / k0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseShiftReport {
    pub theta_exact: f64,
    pub theta_low_energy: f64,
    pub theta_potential: f64,
    pub regime_ok: bool,
}

/// Whether `k0 d << 1` and `|r_IG| << 1` hold.
pub fn low_energy_regime(cfg: &ScatteringConfig) -> bool {
    cfg.k0 * cfg.d <= LOW_ENERGY_MAX_KD && r_ig_from_potential(cfg).abs() <= WEAK_CORRELATION_MAX_R
}

pub fn phase_shift_report(cfg: &ScatteringConfig) -> Result<PhaseShiftReport> {
    let r = r_ig_from_potential(cfg);
    Ok(PhaseShiftReport {
        theta_exact: phase_shift_exact(cfg)?,
        theta_low_energy: phase_shift_low_energy(r, cfg.d, cfg.k0),
        theta_potential: phase_shift_potential(cfg),
        regime_ok: low_energy_regime(cfg) && cfg.potential < cfg.kinetic_energy(),
    })
}

/// `S0 = 4 pi |f|^2` with the small-angle amplitude `f = theta0 / k0`.
pub fn cross_section(theta0: f64, k0: f64) -> f64 {
    let f = theta0 / k0;
    4.0 * PI * f * f
}

/// Purity deficit `4 (2 k0^2 + sigma0^2) R0 sqrt(S0) / sqrt(pi)`.
pub fn purity_deficit(cfg: &ScatteringConfig, theta0: f64) -> f64 {
    4.0 * (2.0 * cfg.k0 * cfg.k0 + cfg.sigma0 * cfg.sigma0)
        * cfg.r0
        * cross_section(theta0, cfg.k0).sqrt()
        / PI.sqrt()
}

/// First-order purity of the post-collision state. Not clamped; a warning is
/// logged when the deficit is too large for the expansion.
pub fn purity_general(cfg: &ScatteringConfig, theta0: f64) -> f64 {
    let deficit = purity_deficit(cfg, theta0);
    if deficit > PURITY_TRUNCATION_WARN {
        warn!("purity deficit {deficit} exceeds {PURITY_TRUNCATION_WARN}; first-order expansion untrusted");
    }
    1.0 - deficit
}

/// Low-energy purity `1 - (16/3) mu V (2 k0^2 + sigma0^2) R0 d^3`. Not clamped.
pub fn purity_low_energy(cfg: &ScatteringConfig) -> f64 {
    let deficit = (16.0 / 3.0)
        * cfg.mu_reduced
        * cfg.potential
        * (2.0 * cfg.k0 * cfg.k0 + cfg.sigma0 * cfg.sigma0)
        * cfg.r0
        * cfg.d.powi(3);
    if !(0.0..=PURITY_TRUNCATION_WARN).contains(&deficit) {
        warn!("low-energy purity deficit {deficit} outside [0, {PURITY_TRUNCATION_WARN}]");
    }
    1.0 - deficit
}

fn width_ratio(k0: f64, sigma0: f64) -> Result<f64> {
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Error::invalid("k0", k0, "must be finite and > 0"));
    }
    if !(sigma0 > 0.0) || !sigma0.is_finite() {
        return Err(Error::invalid("sigma0", sigma0, "must be finite and > 0"));
    }
    let ratio = sigma0 / k0;
    if ratio >= ETA_SERIES_LIMIT {
        return Err(Error::SeriesDivergence {
            ratio,
            limit: ETA_SERIES_LIMIT,
        });
    }
    Ok(ratio)
}

/// `eta_delta = (k0/sigma0)^2 exp[(sigma0/k0)^2 - (3/4)(sigma0/k0)^4]`.
pub fn eta_delta(k0: f64, sigma0: f64) -> Result<f64> {
    let x2 = width_ratio(k0, sigma0)?.powi(2);
    Ok((x2 - 0.75 * x2 * x2).exp() / x2)
}

/// Upper bound `2 / eta_delta` on the correlation.
pub fn r_upper_bound(k0: f64, sigma0: f64) -> Result<f64> {
    Ok(2.0 / eta_delta(k0, sigma0)?)
}

/// Closed-form entanglement duration
/// `|ln(1 - ((1 - r)^(-1/2) - 1) eta_delta)|`, with unit proportionality
/// constant. Durations are comparable with each other, not absolutely
/// normalised.
pub fn entanglement_duration(k0: f64, sigma0: f64, r: f64) -> Result<f64> {
    let eta = eta_delta(k0, sigma0)?;
    let bound = 2.0 / eta;
    if !(r >= 0.0 && r < bound) {
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: 0.0,
            upper: bound,
        });
    }
    // (1 - r)^(-1/2) - 1 without cancellation.
    let excess = (-0.5 * (-r).ln_1p()).exp_m1();
    let x = excess * eta;
    if x >= 1.0 {
        // Second-order terms push the singularity just below 2 / eta.
        return Err(Error::CorrelationOutOfRange {
            r,
            lower: 0.0,
            upper: bound,
        });
    }
    Ok((-x).ln_1p().abs())
}
