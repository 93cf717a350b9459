//! Monotone foliation curves `y(r)`, the correspondence `c -> (r, H)`, leaf
//! construction, the bifurcation-sphere family, and point location.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{
    areal_radius_from_kruskal, envelope_max, envelope_plus_slope, kruskal_invariant, stationary_curvature,
    stationary_envelope, SliceParams,
};
use crate::numerics::find_root_bracketed;
use crate::slice::{
    build_slice_from_root, build_slice_ivp, maximal_slice, reflect_slice, slice_t_at, slice_t_direct, Branch,
    Hypersurface, Side, SliceKind, SliceOptions,
};

#[cfg(test)]
mod tests;

/// Grid size for the `y' < 0` certificate.
pub const CERTIFICATE_POINTS: usize = 10_000;

/// Relative width at which curve inversions stop.
const INVERSE_TOL: f64 = 1e-15;

/// The power-law curve
/// `y(r) = A (r/2M)^3 + r^(3/2) (2M - r)^(1/2) + C/(p+2) (r^(1-p) - r^3/(2M)^(p+2))`
/// on `(0, 2M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoliationCurve {
    #[serde(rename = "M")]
    pub m: f64,
    pub p: f64,
    #[serde(rename = "C")]
    pub amplitude: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

/// Outcome of the `y' < 0` grid scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub max_derivative: f64,
    pub at_r: f64,
    pub points: usize,
}

impl FoliationCurve {
    /// Validates the fields and certifies `y' < 0` for both this curve and
    /// its mirror `A -> -A`, which generates the upper family.
    pub fn new(m: f64, p: f64, amplitude: f64, a: f64) -> Result<Self> {
        let fc = Self { m, p, amplitude, a };
        fc.validate()?;
        for curve in [fc, fc.mirrored()] {
            let cert = curve.certify();
            if !(cert.max_derivative < 0.0) {
                return Err(Error::InvalidCurve(format!(
                    "y'({}) = {} is not negative for p = {}, C = {}, A = {}",
                    cert.at_r, cert.max_derivative, curve.p, curve.amplitude, curve.a
                )));
            }
        }
        Ok(fc)
    }

    /// `p = 2`, `C = 12 M^3`, `A = 0`.
    pub fn default_profile(m: f64) -> Result<Self> {
        Self::new(m, 2.0, 12.0 * m * m * m, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(domain("M", self.m, "(0, inf)"));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(domain("p", self.p, "(1, inf)"));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(domain("C", self.amplitude, "(0, inf)"));
        }
        if !self.a.is_finite() {
            return Err(domain("A", self.a, "finite reals"));
        }
        Ok(())
    }

    /// The same profile with boundary value `-A`.
    pub fn mirrored(&self) -> Self {
        Self { a: -self.a, ..*self }
    }

    /// Largest `y'` over `CERTIFICATE_POINTS` equispaced interior radii.
    pub fn certify(&self) -> Certificate {
        let n = CERTIFICATE_POINTS;
        let mut out = Certificate {
            max_derivative: f64::NEG_INFINITY,
            at_r: f64::NAN,
            points: n,
        };
        for k in 1..=n {
            let r = 2.0 * self.m * k as f64 / (n + 1) as f64;
            let d = gamma_y_derivative(r, self).unwrap_or(f64::NAN);
            if !(d <= out.max_derivative) {
                out.max_derivative = d;
                out.at_r = r;
            }
        }
        out
    }
}

/// Location `r* = (3 - sqrt 3) M / 2` and value `sqrt(6 sqrt 3 - 9) M` of the
/// maximum of `g(r) = r^(1/2) (3M - 2r) / (2M - r)^(1/2)`.
pub fn g_peak(m: f64) -> (f64, f64) {
    let s3 = 3f64.sqrt();
    (0.5 * (3.0 - s3) * m, (6.0 * s3 - 9.0).sqrt() * m)
}

fn g(r: f64, m: f64) -> f64 {
    r.sqrt() * (3.0 * m - 2.0 * r) / (2.0 * m - r).sqrt()
}

/// `y(r)`; exactly `A` at `r = 2M`.
pub fn gamma_y(r: f64, fc: &FoliationCurve) -> Result<f64> {
    let m = fc.m;
    if !(r > 0.0 && r <= 2.0 * m) {
        return Err(domain("r", r, "(0, 2M]"));
    }
    let s = r / (2.0 * m);
    Ok(fc.a * s * s * s
        + r * (r * (2.0 * m - r)).sqrt()
        + fc.amplitude / (fc.p + 2.0) * r.powf(1.0 - fc.p) * (1.0 - s.powf(fc.p + 2.0)))
}

/// `y'(r) = g(r) - C (3 r^2 / ((p+2)(2M)^(p+2)) + (p-1) / ((p+2) r^p)) + 3 A r^2 / (2M)^3`.
pub fn gamma_y_derivative(r: f64, fc: &FoliationCurve) -> Result<f64> {
    let m = fc.m;
    if !(r > 0.0 && r < 2.0 * m) {
        return Err(domain("r", r, "(0, 2M)"));
    }
    let d = 2.0 * m;
    Ok(g(r, m) - fc.amplitude * amplitude_bracket(r, fc.p, m) + 3.0 * fc.a * r * r / (d * d * d))
}

fn amplitude_bracket(r: f64, p: f64, m: f64) -> f64 {
    (3.0 * r * r / (2.0 * m).powf(p + 2.0) + (p - 1.0) / r.powf(p)) / (p + 2.0)
}

/// The upper-family curve `W_A(r) = -y_{-A}(r)`.
pub fn upper_curve(r: f64, fc: &FoliationCurve) -> Result<f64> {
    Ok(-gamma_y(r, &fc.mirrored())?)
}

/// Smallest amplitude, times `margin`, for which `y' < 0` is guaranteed when
/// `A = 0`: `margin * g(r*) / min_(0,2M] bracket(r)`.
pub fn default_amplitude(p: f64, m: f64, margin: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(domain("p", p, "(1, inf)"));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(domain("M", m, "(0, inf)"));
    }
    if !(margin.is_finite() && margin > 1.0) {
        return Err(domain("margin", margin, "(1, inf)"));
    }
    let r_b = (2.0 * m * (p * (p - 1.0) / 6.0).powf(1.0 / (p + 2.0))).min(2.0 * m);
    Ok(margin * g_peak(m).1 / amplitude_bracket(r_b, p, m))
}

/// `y^{-1}(c)` for `c >= A`.
pub fn curve_inverse(c: f64, fc: &FoliationCurve) -> Result<f64> {
    let m = fc.m;
    if !(c >= fc.a) || !c.is_finite() {
        return Err(domain("c", c, "[A, inf) for the lower curve"));
    }
    if c == fc.a {
        return Ok(2.0 * m);
    }
    let f = |r: f64| gamma_y(r, fc).map(|y| y - c).unwrap_or(f64::NAN);
    let mut lo = m;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(domain("c", c, "values attained by the curve"));
        }
    }
    find_root_bracketed(f, lo, 2.0 * m, INVERSE_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafBranch {
    Plus,
    Minus,
    Cylinder,
    Maximal,
}

impl LeafBranch {
    pub fn kind(self) -> SliceKind {
        match self {
            LeafBranch::Plus => SliceKind::InteriorPlus,
            LeafBranch::Minus => SliceKind::CrossingMinus,
            LeafBranch::Cylinder => SliceKind::Cylinder,
            LeafBranch::Maximal => SliceKind::Maximal,
        }
    }
}

/// Which curve a leaf parameter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `c > A`: anchored below the X-axis, read off `y`.
    Lower,
    /// `c = A`: the leaf through the bifurcation sphere.
    Join,
    /// `c < A`: anchored above the X-axis, read off `W_A`.
    Upper,
}

/// The leaf data attached to one value of `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafParams {
    pub c: f64,
    /// Anchor radius on the T-axis.
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub branch: LeafBranch,
    pub family: Family,
}

impl LeafParams {
    pub fn slice_params(&self, m: f64) -> SliceParams {
        SliceParams { m, h: self.h, c: self.c }
    }

    pub fn side(&self) -> Side {
        match self.family {
            Family::Upper => Side::Upper,
            _ => Side::Lower,
        }
    }
}

fn lower_params(c: f64, fc: &FoliationCurve, tol_root: f64) -> Result<LeafParams> {
    let m = fc.m;
    let r = curve_inverse(c, fc)?;
    let h = (r * (r * (2.0 * m - r)).sqrt() - c) / (r * r * r);
    let branch = if r >= 2.0 * m {
        LeafBranch::Minus
    } else if h <= 0.0 {
        let (r_h, _) = envelope_max(h, m)?;
        if (r - r_h).abs() <= tol_root * m {
            LeafBranch::Cylinder
        } else if r < r_h {
            LeafBranch::Plus
        } else {
            LeafBranch::Minus
        }
    } else if envelope_plus_slope(h, r, m)? > 0.0 {
        LeafBranch::Plus
    } else {
        LeafBranch::Minus
    };
    Ok(LeafParams {
        c,
        r,
        h,
        branch,
        family: Family::Lower,
    })
}

/// `c -> (r, H, branch)`: `r = y^{-1}(c)` and `H = (r^(3/2)(2M-r)^(1/2) - c)/r^3`
/// for `c > A`; the mirrored curve with `H` negated for `c < A`.
pub fn params_from_c(c: f64, fc: &FoliationCurve, tol_root: f64) -> Result<LeafParams> {
    fc.validate()?;
    if !c.is_finite() {
        return Err(domain("c", c, "finite reals"));
    }
    let m = fc.m;
    if c == fc.a {
        let h = if fc.a == 0.0 { 0.0 } else { -fc.a / (8.0 * m * m * m) };
        return Ok(LeafParams {
            c,
            r: 2.0 * m,
            h,
            branch: if h == 0.0 { LeafBranch::Maximal } else { LeafBranch::Minus },
            family: Family::Join,
        });
    }
    if c > fc.a {
        return lower_params(c, fc, tol_root);
    }
    let lp = lower_params(-c, &fc.mirrored(), tol_root)?;
    Ok(LeafParams {
        c,
        r: lp.r,
        h: -lp.h,
        branch: lp.branch,
        family: Family::Upper,
    })
}

/// The leaf `Sigma_{H(c), c}`. Upper-family leaves are reflections of
/// lower-family leaves of the mirrored curve.
pub fn leaf(c: f64, fc: &FoliationCurve, opts: &SliceOptions) -> Result<Hypersurface> {
    let lp = params_from_c(c, fc, opts.tol.tol_root)?;
    match (lp.family, lp.branch) {
        (_, LeafBranch::Maximal) => maximal_slice(fc.m, opts),
        (Family::Upper, _) => Ok(reflect_slice(&leaf(-c, &fc.mirrored(), opts)?)),
        _ => build_slice_from_root(&lp.slice_params(fc.m), lp.r, Side::Lower, lp.branch.kind(), opts),
    }
}

/// Builds the leaves for `c_grid` in parallel, in grid order.
pub fn build_family(
    c_grid: &[f64],
    fc: &FoliationCurve,
    opts: &SliceOptions,
) -> Result<Vec<(LeafParams, Hypersurface)>> {
    c_grid
        .par_iter()
        .map(|&c| Ok((params_from_c(c, fc, opts.tol.tol_root)?, leaf(c, fc, opts)?)))
        .collect()
}

/// `c = 0` and `±10^k M^2` for `k` equispaced in `[-2, 2]` (20 per sign),
/// ascending.
pub fn default_c_grid(m: f64) -> Vec<f64> {
    let n = 20;
    let mags: Vec<f64> = (0..n)
        .map(|i| m * m * 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64))
        .collect();
    let mut grid: Vec<f64> = mags.iter().rev().map(|v| -v).collect();
    grid.push(0.0);
    grid.extend(mags);
    grid
}

/// 21 equispaced stations on `[0, 3M]`.
pub fn default_x_grid(m: f64) -> Vec<f64> {
    (0..=20).map(|i| 3.0 * m * i as f64 / 20.0).collect()
}

/// The point `(C, R)` where `y` meets the locus of envelope maxima, with the
/// mean curvature `H = Ĥ(R)` of the cylinder there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub c: f64,
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

/// Solves `y(r) = k~(Ĥ(r), r)` on `(0, 2M)`.
pub fn alpha_curve_intersection(fc: &FoliationCurve) -> Result<AlphaPoint> {
    fc.validate()?;
    let m = fc.m;
    let f = |r: f64| match (gamma_y(r, fc), stationary_envelope(r, m)) {
        (Ok(y), Ok(a)) => y - a,
        _ => f64::NAN,
    };
    let mut lo = m;
    while !(f(lo) > 0.0) {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::InvalidCurve("y stays below the maximum locus near r = 0".into()));
        }
    }
    let mut hi = lo.max(1.5 * m);
    while !(f(hi) < 0.0) {
        hi = 2.0 * m - 0.5 * (2.0 * m - hi);
        if 2.0 * m - hi < 1e-15 * m {
            return Err(Error::InvalidCurve("y stays above the maximum locus near r = 2M".into()));
        }
    }
    let r = find_root_bracketed(f, lo, hi, INVERSE_TOL)?;
    Ok(AlphaPoint {
        c: gamma_y(r, fc)?,
        r,
        h: stationary_curvature(r, m)?,
    })
}

/// Slices with `c = -8 M^3 H`, all through the bifurcation sphere.
pub fn mo_linear_family(h_list: &[f64], m: f64, opts: &SliceOptions) -> Result<Vec<Hypersurface>> {
    h_list
        .par_iter()
        .map(|&h| {
            let p = SliceParams::new(m, h, -8.0 * m * m * m * h)?;
            if h == 0.0 {
                maximal_slice(m, opts)
            } else {
                build_slice_from_root(&p, 2.0 * m, Side::Lower, SliceKind::CrossingMinus, opts)
            }
        })
        .collect()
}

/// The lower curve `y_A` and the curve `y_{-A}` whose negative bounds the
/// upper family; both must pass the `y' < 0` certificate.
pub fn shifted_curve_pair(fc: &FoliationCurve) -> Result<(FoliationCurve, FoliationCurve)> {
    let lower = FoliationCurve::new(fc.m, fc.p, fc.amplitude, fc.a)?;
    Ok((lower, lower.mirrored()))
}

/// Smallest ordering margin `T_{c1}(X) - T_{c2}(X)` over adjacent `c1 < c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disjointness {
    pub min_margin: f64,
    /// `(c1, c2, X)` where the minimum occurs.
    pub at: Option<(f64, f64, f64)>,
    pub comparisons: usize,
}

impl Disjointness {
    pub fn pass(&self) -> bool {
        self.comparisons == 0 || self.min_margin > 0.0
    }
}

/// Orders each adjacent pair of an ascending list of slices at the stations
/// both of them cover.
pub fn ordering_margin(leaves: &[(f64, &Hypersurface)], x_grid: &[f64]) -> Result<Disjointness> {
    let mut out = Disjointness {
        min_margin: f64::INFINITY,
        at: None,
        comparisons: 0,
    };
    for w in leaves.windows(2) {
        let ((c1, s1), (c2, s2)) = (w[0], w[1]);
        let reach = s1.x_extent().min(s2.x_extent());
        for &x in x_grid {
            if x.abs() > reach {
                continue;
            }
            let margin = slice_t_at(s1, x)? - slice_t_at(s2, x)?;
            out.comparisons += 1;
            if !(margin >= out.min_margin) {
                out.min_margin = margin;
                out.at = Some((c1, c2, x));
            }
        }
    }
    Ok(out)
}

/// For adjacent `c1 < c2` and every `X` in `x_grid`:
/// `T(leaf(c2), X) < T(leaf(c1), X)`.
pub fn verify_disjointness(
    fc: &FoliationCurve,
    c_grid: &[f64],
    x_grid: &[f64],
    opts: &SliceOptions,
) -> Result<Disjointness> {
    if c_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("c grid must be strictly ascending".into()));
    }
    let family = build_family(c_grid, fc, opts)?;
    let leaves: Vec<(f64, &Hypersurface)> = family.iter().map(|(lp, s)| (lp.c, s)).collect();
    ordering_margin(&leaves, x_grid)
}

/// Largest `|T|` difference between `reflect(leaf(c))` and the slice for the
/// parameters `params_from_c(-c)` built directly on the upper side from the
/// envelope roots. Infinite when no such slice exists.
pub fn reflection_closure(c: f64, fc: &FoliationCurve, opts: &SliceOptions) -> Result<f64> {
    let reflected = reflect_slice(&leaf(c, fc, opts)?);
    let lp = params_from_c(-c, fc, opts.tol.tol_root)?;
    let direct = match lp.branch {
        LeafBranch::Maximal => maximal_slice(fc.m, opts),
        LeafBranch::Minus => build_slice_ivp(&lp.slice_params(fc.m), Branch::Minus, opts),
        LeafBranch::Plus | LeafBranch::Cylinder => build_slice_ivp(&lp.slice_params(fc.m), Branch::Plus, opts),
    };
    let direct = match direct {
        Ok(s) => s,
        Err(Error::NoSlice { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let reach = direct.x_extent().min(reflected.x_extent());
    let mut worst = 0.0f64;
    for s in reflected.samples.iter().filter(|s| s.x.abs() <= reach) {
        worst = worst.max((slice_t_at(&direct, s.x)? - s.t).abs());
    }
    Ok(worst)
}

/// `T` of `leaf(c)` at `X`, integrating only up to `|X|`. Leaves that end
/// before reaching `|X|` count as `-inf` (lower side) or `+inf` (upper side).
pub fn leaf_t_at(c: f64, x: f64, fc: &FoliationCurve, r_floor: f64, opts: &SliceOptions) -> Result<f64> {
    let lp = params_from_c(c, fc, opts.tol.tol_root)?;
    if lp.branch == LeafBranch::Maximal {
        return Ok(0.0);
    }
    let side = lp.side();
    Ok(
        match slice_t_direct(&lp.slice_params(fc.m), lp.r, side, x, r_floor, opts)? {
            Some(t) => t,
            None if side == Side::Upper => f64::INFINITY,
            None => f64::NEG_INFINITY,
        },
    )
}

/// The leaf through a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Located {
    pub c: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub r: f64,
    pub branch: LeafBranch,
    /// `|T(leaf(c), X') - T'|`.
    pub residual_t: f64,
}

/// Largest `|c| / M^2` tried when bracketing.
pub const LOCATE_C_CAP: f64 = 1e6;

/// Finds `c'` with `|T(leaf(c'), X') - T'| < tol` using the decreasing map
/// `c -> T(leaf(c), X')`.
pub fn locate(t: f64, x: f64, fc: &FoliationCurve, tol: f64, opts: &SliceOptions) -> Result<Located> {
    fc.validate()?;
    let m = fc.m;
    if !(t.is_finite() && x.is_finite()) || !(kruskal_invariant(0.0, m) < x * x - t * t) {
        return Err(Error::BeyondSingularity { t, x });
    }
    let r_point = areal_radius_from_kruskal(t, x, m)?;
    let r_floor = (opts.r_min_stop * m).min(0.5 * r_point);
    let gap = |c: f64| leaf_t_at(c, x, fc, r_floor, opts).map(|v| v - t);
    let finish = |c: f64, residual: f64| -> Result<Located> {
        if !(residual < tol) {
            return Err(Error::Locate(format!(
                "best leaf c = {c} misses (T, X) = ({t}, {x}) by {residual}"
            )));
        }
        let lp = params_from_c(c, fc, opts.tol.tol_root)?;
        Ok(Located {
            c,
            h: lp.h,
            r: lp.r,
            branch: lp.branch,
            residual_t: residual,
        })
    };
    if gap(fc.a)? == 0.0 {
        return finish(fc.a, 0.0);
    }

    let cap = LOCATE_C_CAP * m * m;
    let (mut lo, mut hi) = (-m * m, m * m);
    while gap(lo)? < 0.0 {
        if lo <= -cap {
            return Err(Error::Locate(format!(
                "(T, X) = ({t}, {x}) lies above every leaf with c in [{lo}, {hi}]"
            )));
        }
        lo = (2.0 * lo).max(-cap);
    }
    while gap(hi)? > 0.0 {
        if hi >= cap {
            return Err(Error::Locate(format!(
                "(T, X) = ({t}, {x}) lies below every leaf with c in [{lo}, {hi}]"
            )));
        }
        hi = (2.0 * hi).min(cap);
    }
    // Leaves that stop short give infinite gaps; clamping keeps the sign.
    let bound = 1e3 * m;
    let c = find_root_bracketed(
        |c| gap(c).map(|v| v.clamp(-bound, bound)).unwrap_or(f64::NAN),
        lo,
        hi,
        INVERSE_TOL,
    )?;
    finish(c, gap(c)?.abs())
}
