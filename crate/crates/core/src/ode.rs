//! Dormand–Prince 5(4) explicit Runge–Kutta integrator with embedded error
//! estimation and adaptive step size.

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// States for which `rhs` is undefined make the step that produced them
    /// fail and shrink.
    fn admissible(&self, _y: &[f64; N]) -> bool {
        true
    }

    /// Per-component scale used to normalise the local error estimate. The
    /// step is accepted when `rms(err_i / (tol * scale_i)) <= 1`.
    fn error_scale(&self, y_old: &[f64; N], y_new: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| 1.0 + y_old[i].abs().max(y_new[i].abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    /// Relative to `max(1, |t|)`.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    StepUnderflow,
    TooManySteps,
    NonFinite,
}

impl FailureKind {
    pub fn describe(self) -> &'static str {
        match self {
            FailureKind::StepUnderflow => "step size underflow",
            FailureKind::TooManySteps => "step budget exhausted",
            FailureKind::NonFinite => "non-finite state",
        }
    }
}

/// Failure with the last accepted point.
#[derive(Debug, Clone, Copy)]
pub struct OdeFailure<const N: usize> {
    pub kind: FailureKind,
    pub t: f64,
    pub y: [f64; N],
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn scaled_rms<const N: usize>(v: &[f64; N], scale: &[f64; N], tol: f64) -> f64 {
    let s: f64 = (0..N).map(|i| (v[i] / (tol * scale[i])).powi(2)).sum();
    (s / N as f64).sqrt()
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    tol: f64,
) -> f64 {
    let scale = sys.error_scale(y0, y0);
    let d0 = scaled_rms(y0, &scale, tol);
    let d1 = scaled_rms(f0, &scale, tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + h0 * f0[i]);
    if !sys.admissible(&y1) {
        return h0 * 1e-3;
    }
    let f1 = sys.rhs(t0 + h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_rms(&df, &scale, tol) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates from `t0` to `t_end > t0`, calling `observer` on every accepted
/// step (not on the initial point). Returns the final state.
pub fn integrate<S, O, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    control: &StepControl,
    mut observer: O,
) -> Result<[f64; N], OdeFailure<N>>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]),
{
    integrate_until(sys, t0, y0, t_end, control, |t, y| {
        observer(t, y);
        false
    })
    .map(|(_, y)| y)
}

/// Like [`integrate`], but stops after the first accepted step for which
/// `stop` returns `true`. Returns the time and state reached.
pub fn integrate_until<S, P, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    control: &StepControl,
    mut stop: P,
) -> Result<(f64, [f64; N]), OdeFailure<N>>
where
    S: OdeSystem<N>,
    P: FnMut(f64, &[f64; N]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    if t_end <= t0 {
        return Ok((t, y));
    }
    let tol = control.tol;
    let mut k1 = sys.rhs(t, &y);
    let mut h = initial_step(sys, t, &y, &k1, t_end - t0, tol).min(control.h_max);
    let mut steps = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        if steps >= control.max_steps {
            return Err(OdeFailure {
                kind: FailureKind::TooManySteps,
                t,
                y,
            });
        }
        if h < control.h_min * t.abs().max(1.0) {
            return Err(OdeFailure {
                kind: FailureKind::StepUnderflow,
                t,
                y,
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut ok = true;
        let mut y_new = y;
        for s in 1..7 {
            let ys: [f64; N] =
                std::array::from_fn(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>());
            if !sys.admissible(&ys) || ys.iter().any(|v| !v.is_finite()) {
                ok = false;
                break;
            }
            k[s] = sys.rhs(t + C[s] * h, &ys);
            if s == 6 {
                y_new = ys;
            }
        }
        steps += 1;
        if !ok {
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let err_vec: [f64; N] =
            std::array::from_fn(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>());
        let scale = sys.error_scale(&y, &y_new);
        let err = scaled_rms(&err_vec, &scale, tol);
        if !err.is_finite() {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k[6];
            if stop(t, &y) {
                return Ok((t, y));
            }
            let mut factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(control.h_max);
            last_rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OdeFailure {
            kind: FailureKind::NonFinite,
            t,
            y,
        });
    }
    Ok((t, y))
}
