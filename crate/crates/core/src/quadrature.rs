//! Adaptive tensor-product Gauss–Kronrod cubature on axis-aligned boxes.
//!
//! Each box is integrated with the 15-point Kronrod rule along every axis. The
//! embedded 7-point Gauss rule, applied along one axis at a time, gives a
//! per-axis error estimate; the box with the largest error is bisected along
//! its worst axis until the global estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for Kronrod nodes 1, 3, 5 and the centre.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const POINTS: usize = 15;

/// Nodes on [-1, 1] with Kronrod and Gauss weights (Gauss weight 0 where the
/// node is Kronrod-only).
fn rule() -> [(f64, f64, f64); POINTS] {
    let mut out = [(0.0, 0.0, 0.0); POINTS];
    for i in 0..7 {
        let g = if i % 2 == 1 {
            GAUSS_WEIGHTS[i / 2]
        } else {
            0.0
        };
        out[i] = (-KRONROD_NODES[i], KRONROD_WEIGHTS[i], g);
        out[POINTS - 1 - i] = (KRONROD_NODES[i], KRONROD_WEIGHTS[i], g);
    }
    out[7] = (0.0, KRONROD_WEIGHTS[7], GAUSS_WEIGHTS[3]);
    out
}

#[derive(Debug, Clone, Copy)]
pub struct CubatureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_evals: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<const M: usize> {
    pub value: [f64; M],
    pub error: f64,
    pub evaluations: usize,
}

struct Region<const N: usize, const M: usize> {
    lower: [f64; N],
    upper: [f64; N],
    value: [f64; M],
    error: f64,
    split_axis: usize,
}

impl<const N: usize, const M: usize> PartialEq for Region<N, M> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize, const M: usize> Eq for Region<N, M> {}
impl<const N: usize, const M: usize> PartialOrd for Region<N, M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize, const M: usize> Ord for Region<N, M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn apply_rule<F, const N: usize, const M: usize>(
    f: &F,
    lower: [f64; N],
    upper: [f64; N],
) -> Region<N, M>
where
    F: Fn(&[f64; N]) -> [f64; M],
{
    let nodes = rule();
    let half: [f64; N] = std::array::from_fn(|d| 0.5 * (upper[d] - lower[d]));
    let mid: [f64; N] = std::array::from_fn(|d| 0.5 * (upper[d] + lower[d]));
    let jacobian: f64 = half.iter().product();

    let mut kronrod = [0.0; M];
    // Kronrod along all axes except one, which uses Gauss.
    let mut mixed = vec![[0.0; M]; N];

    let total = POINTS.pow(N as u32);
    let mut idx = [0usize; N];
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % POINTS;
            rem /= POINTS;
        }
        let x: [f64; N] = std::array::from_fn(|d| mid[d] + half[d] * nodes[idx[d]].0);
        let fx = f(&x);
        let wk: f64 = idx.iter().map(|&i| nodes[i].1).product();
        for m in 0..M {
            kronrod[m] += wk * fx[m];
        }
        for (d, acc) in mixed.iter_mut().enumerate() {
            let gw = nodes[idx[d]].2;
            if gw == 0.0 {
                continue;
            }
            let w = wk / nodes[idx[d]].1 * gw;
            for m in 0..M {
                acc[m] += w * fx[m];
            }
        }
    }

    let mut axis_err = [0.0f64; N];
    for d in 0..N {
        axis_err[d] = (0..M)
            .map(|m| (jacobian * (kronrod[m] - mixed[d][m])).abs())
            .fold(0.0, f64::max);
    }
    let split_axis = (0..N)
        .max_by(|&a, &b| axis_err[a].total_cmp(&axis_err[b]))
        .unwrap_or(0);
    Region {
        lower,
        upper,
        value: std::array::from_fn(|m| jacobian * kronrod[m]),
        error: axis_err.iter().sum(),
        split_axis,
    }
}

/// Integrates a vector-valued `f` over the box `[lower, upper]`.
///
/// Converges when the summed error estimate drops below
/// `max(abs_tol, rel_tol * max_m |I_m|)`; fails once `max_evals` is exceeded.
pub fn integrate<F, const N: usize, const M: usize>(
    f: F,
    lower: [f64; N],
    upper: [f64; N],
    opts: &CubatureOptions,
) -> Result<Estimate<M>>
where
    F: Fn(&[f64; N]) -> [f64; M],
{
    let per_region = POINTS.pow(N as u32);
    let first = apply_rule(&f, lower, upper);
    let mut evaluations = per_region;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let scale = value.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if error <= opts.abs_tol.max(opts.rel_tol * scale) {
            break;
        }
        if evaluations + 2 * per_region > opts.max_evals {
            return Err(Error::Quadrature {
                evaluations,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let axis = worst.split_axis;
        let cut = 0.5 * (worst.lower[axis] + worst.upper[axis]);
        let mut left_upper = worst.upper;
        left_upper[axis] = cut;
        let mut right_lower = worst.lower;
        right_lower[axis] = cut;
        let left = apply_rule(&f, worst.lower, left_upper);
        let right = apply_rule(&f, right_lower, worst.upper);
        evaluations += 2 * per_region;
        for m in 0..M {
            value[m] += left.value[m] + right.value[m] - worst.value[m];
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from the leaves to shed accumulated update roundoff.
    let mut total = [0.0; M];
    let mut err = 0.0;
    for region in heap.iter() {
        for m in 0..M {
            total[m] += region.value[m];
        }
        err += region.error;
    }
    Ok(Estimate {
        value: total,
        error: err,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F, const N: usize>(
    f: F,
    lower: [f64; N],
    upper: [f64; N],
    opts: &CubatureOptions,
) -> Result<f64>
where
    F: Fn(&[f64; N]) -> f64,
{
    integrate(|x| [f(x)], lower, upper, opts).map(|e| e.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let r = rule();
        let k: f64 = r.iter().map(|n| n.1).sum();
        let g: f64 = r.iter().map(|n| n.2).sum();
        assert_relative_eq!(k, 2.0, max_relative = 1e-15);
        assert_relative_eq!(g, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_scalar(
            |x: &[f64; 2]| x[0].powi(6) * x[1].powi(3),
            [0.0, -1.0],
            [2.0, 3.0],
            &Default::default(),
        )
        .unwrap();
        assert_relative_eq!(v, (128.0 / 7.0) * (81.0 - 1.0) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_in_one_dimension() {
        let v = integrate_scalar(
            |x: &[f64; 1]| (-0.5 * x[0] * x[0]).exp(),
            [-10.0],
            [10.0],
            &Default::default(),
        )
        .unwrap();
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn three_dimensional_inverse_cube() {
        let v = integrate_scalar(
            |x: &[f64; 3]| 2.0 / x[2].powi(3),
            [0.0, 0.0, 0.1],
            [1.0, 2.0, 1.0],
            &Default::default(),
        )
        .unwrap();
        assert_relative_eq!(v, 2.0 * (100.0 - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = CubatureOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_evals: 100,
        };
        let err =
            integrate_scalar(|x: &[f64; 1]| x[0].abs().sqrt(), [-1.0], [1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
