//! The Kruskal-coordinate generator: the CMC equation integrated as an
//! initial-value problem in `X` from the T-axis.

use super::{
    anchor_radius, branch_roots, mirror_half, t_intercept_from_root, Branch, Generator, Hypersurface,
    Sample, Side, SliceEnd, SliceKind, SliceOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{areal_radius_from_kruskal, classify_region, cmc_rhs_kruskal, SliceParams};
use crate::numerics::{solve_ivp, solve_ivp_at, IvpOptions, StopReason};

/// Sub-intervals per accepted step used to resolve the arclength map.
const ARC_SUBDIVISIONS: usize = 16;

/// Builds the slice for `(M, H, c)` on the given branch. `H > 0` is handled
/// directly: the anchor comes from the reflected parameters and the intercept
/// is positive.
pub fn build_slice_ivp(p: &SliceParams, branch: Branch, opts: &SliceOptions) -> Result<Hypersurface> {
    p.validate()?;
    opts.validate()?;
    let base = if p.h > 0.0 { p.reflected() } else { *p };
    let roots = branch_roots(&base, opts.tol.tol_root)?;
    let r_tilde = anchor_radius(p, branch, opts.tol.tol_root)?;
    let kind = if p.h == 0.0 && p.c == 0.0 {
        SliceKind::Maximal
    } else if roots.is_cylinder() {
        SliceKind::Cylinder
    } else {
        match branch {
            Branch::Plus => SliceKind::InteriorPlus,
            Branch::Minus => SliceKind::CrossingMinus,
        }
    };
    build_slice_from_root(p, r_tilde, Side::for_curvature(p.h), kind, opts)
}

/// Integrates from `(X, T, T') = (0, T0(r~), 0)` with the anchor radius and
/// side given explicitly, so callers that already know `r~` skip the root
/// search.
pub fn build_slice_from_root(
    p: &SliceParams,
    r_tilde: f64,
    side: Side,
    kind: SliceKind,
    opts: &SliceOptions,
) -> Result<Hypersurface> {
    p.validate()?;
    opts.validate()?;
    let (m, h) = (p.m, p.h);
    if !(r_tilde > 0.0 && r_tilde <= 2.0 * m) {
        return Err(Error::Domain {
            quantity: "anchor radius",
            value: r_tilde,
            domain: "(0, 2M]",
        });
    }
    let t0 = t_intercept_from_root(r_tilde, side, m);
    let r_stop = (opts.r_min_stop * m).min(0.5 * r_tilde);
    let eps = opts.eps_space;

    let rhs = |x: f64, y: &[f64; 2]| cmc_rhs_kruskal(y[0], y[1], x, h, m).ok().map(|f| [y[1], f]);
    let ivp = integrator_options(opts);

    let mut fired = SliceEnd::XMax;
    let mut stop = |x: f64, y: &[f64; 2]| {
        if 1.0 - y[1] * y[1] < eps {
            fired = SliceEnd::NearlyNull;
            return true;
        }
        match areal_radius_from_kruskal(y[0], x, m) {
            Ok(r) if r >= r_stop => false,
            _ => {
                fired = SliceEnd::Singularity;
                true
            }
        }
    };
    let coarse = solve_ivp(rhs, 0.0, [t0, 0.0], opts.x_max, &ivp, Some(&mut stop))
        .map_err(|e| Error::NoSlice {
            h,
            c: p.c,
            reason: format!("integration failed near X = {}: {}", e.partial.last_x(), e.error),
        })?;
    let end = match coarse.stop {
        StopReason::Reached => SliceEnd::XMax,
        StopReason::Predicate => fired,
    };
    let x_end = coarse.last_x();
    if !(x_end > 0.0) {
        return Err(Error::NoSlice {
            h,
            c: p.c,
            reason: "the slice stops at the T-axis".into(),
        });
    }

    let targets = arclength_targets(&coarse.xs, &coarse.ys, &coarse.dys, opts.samples_per_side - 1);
    let fine = match solve_ivp_at(rhs, 0.0, [t0, 0.0], &targets[1..], &ivp) {
        Ok(t) => t,
        Err(e) => e.partial,
    };

    let mut half = Vec::with_capacity(fine.xs.len() + 1);
    let mut half_slopes = Vec::with_capacity(fine.xs.len() + 1);
    half.push(Sample {
        x: 0.0,
        t: t0,
        r: areal_radius_from_kruskal(t0, 0.0, m)?,
        region: classify_region(t0, 0.0, m)?,
    });
    half_slopes.push(0.0);
    for (x, y) in fine.xs.iter().zip(&fine.ys) {
        half.push(Sample {
            x: *x,
            t: y[0],
            r: areal_radius_from_kruskal(y[0], *x, m)?,
            region: classify_region(y[0], *x, m)?,
        });
        half_slopes.push(y[1]);
    }
    let (samples, slopes) = mirror_half(&half, Some(&half_slopes));
    Ok(Hypersurface {
        params: *p,
        kind,
        t_intercept: t0,
        samples,
        slopes,
        generator: Generator::Ivp,
        end,
    })
}

fn integrator_options(opts: &SliceOptions) -> IvpOptions {
    IvpOptions {
        rtol: opts.ode_rtol,
        atol: opts.ode_atol,
        max_step: opts.x_max / 200.0,
        initial_step: None,
        max_steps: 2_000_000,
        min_step: 1e-300,
        event_tol: 1e-13 * opts.x_max,
    }
}

/// `T` at a single `X` on the slice anchored at `r_tilde`, integrating only as
/// far as `|X|`. Returns `None` when the slice reaches the light cone or drops
/// below `r_floor` (or half the anchor radius) before getting there.
pub fn slice_t_direct(
    p: &SliceParams,
    r_tilde: f64,
    side: Side,
    x: f64,
    r_floor: f64,
    opts: &SliceOptions,
) -> Result<Option<f64>> {
    p.validate()?;
    opts.validate()?;
    let (m, h) = (p.m, p.h);
    if !(r_tilde > 0.0 && r_tilde <= 2.0 * m) {
        return Err(Error::Domain {
            quantity: "anchor radius",
            value: r_tilde,
            domain: "(0, 2M]",
        });
    }
    let t0 = t_intercept_from_root(r_tilde, side, m);
    let x = x.abs();
    if x == 0.0 {
        return Ok(Some(t0));
    }
    let r_stop = r_floor.min(0.5 * r_tilde);
    let eps = opts.eps_space;
    let rhs = |x: f64, y: &[f64; 2]| cmc_rhs_kruskal(y[0], y[1], x, h, m).ok().map(|f| [y[1], f]);
    let mut stop = |x: f64, y: &[f64; 2]| {
        1.0 - y[1] * y[1] < eps || !matches!(areal_radius_from_kruskal(y[0], x, m), Ok(r) if r >= r_stop)
    };
    let ivp = IvpOptions {
        max_step: x / 50.0,
        ..integrator_options(opts)
    };
    match solve_ivp(rhs, 0.0, [t0, 0.0], x, &ivp, Some(&mut stop)) {
        Ok(tr) if tr.stop == StopReason::Reached => Ok(Some(tr.last_y()[0])),
        Ok(_) => Ok(None),
        Err(e) => Err(Error::NoSlice {
            h,
            c: p.c,
            reason: format!("integration failed near X = {}: {}", e.partial.last_x(), e.error),
        }),
    }
}

/// `n + 1` abscissae from 0 to the last node, uniform in the normalised
/// arclength `ds^2 = (dX/X_end)^2 + dF'^2 + (d atanh F' / max|atanh F'|)^2`,
/// which concentrates samples where the slope runs toward the light cone.
fn arclength_targets(xs: &[f64], ys: &[[f64; 2]], dys: &[[f64; 2]], n: usize) -> Vec<f64> {
    let x_end = *xs.last().expect("non-empty");
    // Dense (X, F') by cubic Hermite interpolation of F' using F''.
    let mut dense_x = Vec::with_capacity(xs.len() * ARC_SUBDIVISIONS);
    let mut dense_fp = Vec::with_capacity(xs.len() * ARC_SUBDIVISIONS);
    dense_x.push(xs[0]);
    dense_fp.push(ys[0][1]);
    for i in 0..xs.len() - 1 {
        let dx = xs[i + 1] - xs[i];
        let (a, b) = (ys[i][1], ys[i + 1][1]);
        let (da, db) = (dys[i][1] * dx, dys[i + 1][1] * dx);
        for k in 1..=ARC_SUBDIVISIONS {
            let u = k as f64 / ARC_SUBDIVISIONS as f64;
            let (u2, u3) = (u * u, u * u * u);
            let v = (2.0 * u3 - 3.0 * u2 + 1.0) * a
                + (u3 - 2.0 * u2 + u) * da
                + (-2.0 * u3 + 3.0 * u2) * b
                + (u3 - u2) * db;
            dense_x.push(if k == ARC_SUBDIVISIONS { xs[i + 1] } else { xs[i] + u * dx });
            dense_fp.push(v.clamp(-1.0 + 1e-16, 1.0 - 1e-16));
        }
    }
    let psi: Vec<f64> = dense_fp.iter().map(|v| v.atanh()).collect();
    let psi_max = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut s = Vec::with_capacity(dense_x.len());
    s.push(0.0);
    for i in 1..dense_x.len() {
        let dx = (dense_x[i] - dense_x[i - 1]) / x_end;
        let dfp = dense_fp[i] - dense_fp[i - 1];
        let dpsi = if psi_max > 1e-12 {
            (psi[i] - psi[i - 1]) / psi_max
        } else {
            0.0
        };
        s.push(s[i - 1] + (dx * dx + dfp * dfp + dpsi * dpsi).sqrt());
    }
    let total = *s.last().expect("non-empty");

    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut j = 0;
    for k in 1..n {
        let target = total * k as f64 / n as f64;
        while j + 1 < s.len() && s[j + 1] < target {
            j += 1;
        }
        let (s0, s1) = (s[j], s[(j + 1).min(s.len() - 1)]);
        let (x0, x1) = (dense_x[j], dense_x[(j + 1).min(s.len() - 1)]);
        let x = if s1 > s0 {
            x0 + (x1 - x0) * (target - s0) / (s1 - s0)
        } else {
            x0
        };
        let prev = *out.last().expect("non-empty");
        if x > prev && x < x_end {
            out.push(x);
        }
    }
    out.push(x_end);
    out
}
