//! The Schwarzschild-coordinate generator: `t = f(r)` from the first integral
//! by singular quadrature, mapped into Kruskal coordinates.

use super::{
    branch_roots, maximal_slice, mirror_half, t_intercept_from_root, Branch, Generator, Hypersurface,
    Sample, Side, SliceEnd, SliceKind, SliceOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{
    areal_radius_from_invariant, areal_radius_from_kruskal, classify_region, kruskal_from_schwarzschild,
    Region, SliceParams,
};
use crate::numerics::{integrate_endpoint_singular, SingularEnd};

fn anchor(p: &SliceParams, branch: Branch, opts: &SliceOptions) -> Result<f64> {
    if p.h > 0.0 {
        return Err(Error::NoSlice {
            h: p.h,
            c: p.c,
            reason: "the quadrature generator covers H <= 0; reflect the H < 0 slice".into(),
        });
    }
    let roots = branch_roots(p, opts.tol.tol_root)?;
    if roots.is_cylinder() {
        return Err(Error::NoSlice {
            h: p.h,
            c: p.c,
            reason: "the cylinder r = R_H is not a graph over r; use the closed form".into(),
        });
    }
    roots.get(branch).ok_or_else(|| Error::NoSlice {
        h: p.h,
        c: p.c,
        reason: "requested branch root does not exist".into(),
    })
}

/// Default radial grid with `n` points per piece: clustered at the anchor and,
/// for crossing slices, on both sides of the horizon collar.
pub fn quadrature_r_grid(p: &SliceParams, branch: Branch, n: usize, opts: &SliceOptions) -> Result<Vec<f64>> {
    let m = p.m;
    let r_tilde = anchor(p, branch, opts)?;
    let n = n.max(2);
    let r_out = areal_radius_from_invariant(opts.x_max * opts.x_max, m)?.max(2.0 * m * (1.0 + 1e-6));
    let mut grid = Vec::new();
    match branch {
        Branch::Plus => {
            let r_stop = (opts.r_min_stop * m).min(0.5 * r_tilde);
            for k in 1..=n {
                let u = k as f64 / n as f64;
                grid.push(r_tilde - (r_tilde - r_stop) * u * u);
            }
        }
        Branch::Minus if r_tilde >= 2.0 * m => {
            let (lo, hi) = ((1e-8 * m).ln(), (r_out - 2.0 * m).ln());
            for k in 0..n {
                grid.push(2.0 * m + (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp());
            }
        }
        Branch::Minus => {
            let delta = opts.horizon_collar * m;
            let inner = 2.0 * m - delta;
            if inner > r_tilde {
                for k in 1..=n {
                    let u = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos());
                    grid.push(r_tilde + (inner - r_tilde) * u);
                }
            }
            let (lo, hi) = (delta.ln(), (r_out - 2.0 * m).max(2.0 * delta).ln());
            for k in 0..n {
                grid.push(2.0 * m + (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp());
            }
        }
    }
    Ok(grid)
}

/// Builds the slice from `t = f(r)` with `f(r~) = 0`, evaluated at the radii
/// in `r_grid` that lie in the slice's domain. Radii inside the horizon collar
/// are skipped for crossing slices; no slopes are stored.
pub fn build_slice_quadrature(
    p: &SliceParams,
    branch: Branch,
    r_grid: &[f64],
    opts: &SliceOptions,
) -> Result<Hypersurface> {
    p.validate()?;
    opts.validate()?;
    let m = p.m;
    if p.h == 0.0 && p.c == 0.0 {
        let mut s = maximal_slice(m, opts)?;
        s.generator = Generator::Quadrature;
        return Ok(s);
    }
    let r_tilde = anchor(p, branch, opts)?;
    // Each segment aims for its share of the absolute budget; a segment that
    // misses its share is kept as long as the summed error estimates of all
    // segments stay within tol_quad.
    let budget = opts.tol.tol_quad;
    let share = budget / r_grid.len().max(1) as f64;
    let mut spent = 0.0;
    let mut segment = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, end: SingularEnd| -> Result<f64> {
        match integrate_endpoint_singular(f, a, b, end, share) {
            Ok(v) => {
                spent += share;
                Ok(v)
            }
            Err(Error::Accuracy { estimate, error, .. }) if spent + error <= budget => {
                spent += error;
                Ok(estimate)
            }
            Err(e) => Err(e),
        }
    };
    let (h, c) = (p.h, p.c);
    let j = move |r: f64| h * r + c / (r * r);
    let lapse = move |r: f64| 1.0 - 2.0 * m / r;
    let q = move |r: f64| lapse(r) + j(r) * j(r);
    let degenerate = r_tilde >= 2.0 * m;
    let collar = opts.horizon_collar * m;

    // (r, t) pairs on the X > 0 piece.
    let mut piece: Vec<(f64, f64)> = Vec::new();
    match branch {
        Branch::Plus => {
            // t(r) = -int_r^{r~} J / (|h| sqrt q), singular at r~. Points where
            // rounding pushes q to zero or below carry no weight.
            let integrand = |r: f64| {
                let qr = q(r);
                if qr > 0.0 {
                    j(r) / (-lapse(r) * qr.sqrt())
                } else {
                    0.0
                }
            };
            let mut radii: Vec<f64> = r_grid.iter().copied().filter(|&r| r > 0.0 && r < r_tilde).collect();
            radii.sort_by(|a, b| b.total_cmp(a));
            let mut t = 0.0;
            let mut prev = r_tilde;
            for (i, &r) in radii.iter().enumerate() {
                let end = if i == 0 { SingularEnd::Upper } else { SingularEnd::None };
                t -= segment(&integrand, r, prev, end)?;
                piece.push((r, t));
                prev = r;
            }
        }
        Branch::Minus if degenerate => {
            // t(r) = int_{2M}^r J / (h sqrt q), singular at 2M.
            let integrand = |r: f64| {
                let qr = q(r);
                if qr > 0.0 {
                    j(r) / (lapse(r) * qr.sqrt())
                } else {
                    0.0
                }
            };
            let mut radii: Vec<f64> = r_grid.iter().copied().filter(|&r| r > 2.0 * m).collect();
            radii.sort_by(f64::total_cmp);
            let mut t = 0.0;
            let mut prev = 2.0 * m;
            for (i, &r) in radii.iter().enumerate() {
                let end = if i == 0 { SingularEnd::Lower } else { SingularEnd::None };
                t += segment(&integrand, prev, r, end)?;
                piece.push((r, t));
                prev = r;
            }
        }
        Branch::Minus => {
            // t(r) = r*(r) - r*(r~) + int_{r~}^r g, with the horizon pole of
            // dt/dr carried by the tortoise coordinate r* and
            // g = -1 / (sqrt q (J + sqrt q)) regular across r = 2M.
            let tortoise = |r: f64| r + 2.0 * m * (r / (2.0 * m) - 1.0).abs().ln();
            let g = |r: f64| {
                let qr = q(r);
                if qr > 0.0 {
                    let sq = qr.sqrt();
                    -1.0 / (sq * (j(r) + sq))
                } else {
                    0.0
                }
            };
            let mut radii: Vec<f64> = r_grid
                .iter()
                .copied()
                .filter(|&r| r > r_tilde && (r - 2.0 * m).abs() >= collar)
                .collect();
            radii.sort_by(f64::total_cmp);
            let mut acc = 0.0;
            let mut prev = r_tilde;
            for (i, &r) in radii.iter().enumerate() {
                let end = if i == 0 { SingularEnd::Lower } else { SingularEnd::None };
                acc += segment(&g, prev, r, end)?;
                piece.push((r, tortoise(r) - tortoise(r_tilde) + acc));
                prev = r;
            }
        }
    }

    let t0 = t_intercept_from_root(r_tilde, Side::Lower, m);
    let mut half = vec![Sample {
        x: 0.0,
        t: t0,
        r: r_tilde,
        region: classify_region(t0, 0.0, m)?,
    }];
    for (r, t) in piece {
        let region = if r > 2.0 * m { Region::I } else { Region::IIPrime };
        let (tt, xx) = kruskal_from_schwarzschild(t, r, region, m)?;
        if !(xx > 0.0) {
            continue;
        }
        half.push(Sample {
            x: xx,
            t: tt,
            r: areal_radius_from_kruskal(tt, xx, m)?,
            region: classify_region(tt, xx, m)?,
        });
    }
    half.sort_by(|a, b| a.x.total_cmp(&b.x));
    half.dedup_by(|a, b| a.x == b.x);
    let (samples, _) = mirror_half(&half, None);
    let kind = match branch {
        Branch::Plus => SliceKind::InteriorPlus,
        Branch::Minus => SliceKind::CrossingMinus,
    };
    Ok(Hypersurface {
        params: *p,
        kind,
        t_intercept: t0,
        samples,
        slopes: None,
        generator: Generator::Quadrature,
        end: match branch {
            Branch::Plus => SliceEnd::Singularity,
            Branch::Minus => SliceEnd::XMax,
        },
    })
}
