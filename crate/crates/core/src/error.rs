use crate::geodesics::GeodesicState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("phase shift at a branch boundary of the principal arctangent (denominator {denominator:e})")]
    BranchBoundary { denominator: f64 },

    #[error("series for eta_delta diverges: sigma0/k0 = {ratio} (must be < {limit})")]
    SeriesDivergence { ratio: f64, limit: f64 },

    #[error("correlation r = {r} outside the admissible interval [{lower}, {upper})")]
    CorrelationOutOfRange { r: f64, lower: f64, upper: f64 },

    #[error("geodesic integration failed at tau = {}: {reason}", last_state.tau)]
    Integration {
        reason: &'static str,
        last_state: Box<GeodesicState>,
    },

    #[error("momentum target {target} not reached by tau = {tau_max}")]
    NotReached { target: f64, tau_max: f64 },

    #[error("quadrature did not converge after {evaluations} evaluations (error estimate {error_estimate:e})")]
    Quadrature {
        evaluations: usize,
        error_estimate: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
