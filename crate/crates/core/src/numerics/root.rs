//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 2000;

/// Finds a root of `f` inside `[lo, hi]` given a sign change.
///
/// Regula falsi with the Illinois modification proposes each iterate; a
/// bisection step is forced whenever the bracket fails to halve over two
/// iterations, so convergence is guaranteed. Iteration stops when the bracket
/// width falls to `tol * |x|`, when `f(x) == 0`, or when the bracket can no
/// longer be split. The result never leaves the initial bracket and is
/// bit-stable for a given `f`.
pub fn find_root_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    // Which end was retained last time; used by the Illinois weighting.
    let mut side = 0i8;
    let mut width_two_ago = f64::INFINITY;
    let mut width_prev = b - a;

    for _ in 0..MAX_ITER {
        let width = b - a;
        let mid = a + 0.5 * width;
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if width <= tol * scale || mid <= a || mid >= b {
            break;
        }

        let force_bisect = width > 0.5 * width_two_ago;
        let mut x = if force_bisect {
            mid
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = mid;
        }

        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            // Treat as an uninformative point: bisect instead.
            let fm = f(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
            side = 0;
        } else if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        width_two_ago = width_prev;
        width_prev = width;
    }

    // Return the end with the smaller residual magnitude; both are inside the
    // original bracket. The Illinois scaling distorts fa/fb, so re-evaluate.
    let (ra, rb) = (f(a).abs(), f(b).abs());
    Ok(if ra <= rb { a } else { b })
}

/// Newton iteration safeguarded by a sign-change bracket; falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
pub(crate) fn newton_bracketed<F>(mut f: F, lo: f64, hi: f64, guess: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo, hi);
    let (fa, _) = f(a);
    let neg_at_a = fa < 0.0;
    let mut x = guess.clamp(a, b);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == neg_at_a {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) || next == x {
            return next;
        }
        x = next;
    }
    x
}
