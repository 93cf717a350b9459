//! Adaptive Gauss-Kronrod quadrature, with a `u^2` substitution that removes
//! an inverse-square-root singularity at one endpoint.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const MAX_SUBDIVISIONS: usize = 2000;

// 15-point Kronrod nodes (non-negative half) and weights, with the embedded
// 7-point Gauss weights on the odd nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Which endpoint of the interval carries the `|x - end|^(-1/2)` singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    Lower,
    Upper,
    None,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gauss_kronrod(&mut f, a, b);
    if !(value + error).is_finite() {
        return Err(Error::Accuracy {
            estimate: value,
            error: f64::INFINITY,
            tol,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    for _ in 0..MAX_SUBDIVISIONS {
        if total_err <= tol {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&mut f, mid, worst.b);
        if !(v1 + v2 + e1 + e2).is_finite() {
            return Err(Error::Accuracy {
                estimate: total,
                error: f64::INFINITY,
                tol,
            });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated cancellation before the final verdict.
    let total: f64 = heap.iter().map(|s| s.value).sum();
    let total_err: f64 = heap.iter().map(|s| s.error).sum();
    if total_err <= tol {
        Ok(total)
    } else {
        Err(Error::Accuracy {
            estimate: total,
            error: total_err,
            tol,
        })
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// When `singular_end` names an endpoint, `f(x) * |x - end|^(1/2)` must stay
/// bounded there; the integral is rewritten with `|x - end| = u^2`, which turns
/// the integrand into the smooth `2 u f(end ± u^2)` before adaptive
/// Gauss-Kronrod refinement. `b < a` is allowed and flips the sign.
pub fn integrate_endpoint_singular<F>(
    mut f: F,
    a: f64,
    b: f64,
    singular_end: SingularEnd,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if b < a {
        let end = match singular_end {
            SingularEnd::Lower => SingularEnd::Upper,
            SingularEnd::Upper => SingularEnd::Lower,
            SingularEnd::None => SingularEnd::None,
        };
        return integrate_endpoint_singular(f, b, a, end, tol).map(|v| -v);
    }
    let span = b - a;
    match singular_end {
        SingularEnd::None => adaptive(f, a, b, tol),
        SingularEnd::Lower => adaptive(
            |u| {
                if u == 0.0 {
                    0.0
                } else {
                    2.0 * u * f(a + u * u)
                }
            },
            0.0,
            span.sqrt(),
            tol,
        ),
        SingularEnd::Upper => adaptive(
            |u| {
                if u == 0.0 {
                    0.0
                } else {
                    2.0 * u * f(b - u * u)
                }
            },
            0.0,
            span.sqrt(),
            tol,
        ),
    }
}
