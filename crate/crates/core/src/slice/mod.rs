//! Individual TSS-CMC hypersurfaces: branch roots, T-intercepts, the
//! Schwarzschild first integral, the two generators, and sample utilities.

mod ivp;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{envelope_max, envelope_plus, lapse_h, Region, SliceParams};
use crate::numerics::{derivative_on_grid, find_root_bracketed, Tolerances};

pub use ivp::{build_slice_from_root, build_slice_ivp, slice_t_direct};
pub use quadrature::{build_slice_quadrature, quadrature_r_grid};

/// Which root of `k~_H(r) = c` anchors the slice on the T-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceKind {
    /// Stays inside `r < 2M` and ends at the singularity.
    InteriorPlus,
    /// Crosses the horizon into both exterior regions.
    CrossingMinus,
    /// The hyperbola `r = R_H`.
    Cylinder,
    /// `T = 0`.
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    Ivp,
    Quadrature,
    ClosedForm,
}

/// Why the positive-X half of a slice ends where it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceEnd {
    /// Reached the requested `X_max`.
    XMax,
    /// Areal radius fell below the stopping radius.
    Singularity,
    /// The slope came within `eps_space` of the light cone.
    NearlyNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub t: f64,
    pub r: f64,
    pub region: Region,
}

/// A sampled slice, ordered by increasing `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypersurface {
    pub params: SliceParams,
    pub kind: SliceKind,
    /// `T` at `X = 0`.
    pub t_intercept: f64,
    pub samples: Vec<Sample>,
    /// `dT/dX` at each sample when the generator provides it.
    pub slopes: Option<Vec<f64>>,
    pub generator: Generator,
    pub end: SliceEnd,
}

impl Hypersurface {
    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Largest `|X|` covered.
    pub fn x_extent(&self) -> f64 {
        self.samples.iter().map(|s| s.x.abs()).fold(0.0, f64::max)
    }

    /// `dT/dX` at each sample: stored slopes if present, else an 11-point
    /// finite-difference estimate.
    pub fn slope_values(&self) -> Vec<f64> {
        match &self.slopes {
            Some(s) => s.clone(),
            None => derivative_on_grid(&self.xs(), &self.ts(), 5),
        }
    }
}

/// Roots of `k~_H(r) = c` on either side of the maximum `R_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRoots {
    pub r_plus: Option<f64>,
    pub r_minus: Option<f64>,
    pub r_max: f64,
    pub c_max: f64,
}

impl BranchRoots {
    pub fn get(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Plus => self.r_plus,
            Branch::Minus => self.r_minus,
        }
    }

    pub fn is_cylinder(&self) -> bool {
        matches!((self.r_plus, self.r_minus), (Some(a), Some(b)) if a == b)
    }
}

/// Tunables for slice construction. Radii are in units of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SliceOptions {
    pub x_max: f64,
    /// Samples on `0 <= X <= X_end`, including `X = 0`.
    pub samples_per_side: usize,
    pub r_min_stop: f64,
    pub eps_space: f64,
    pub horizon_collar: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub tol: Tolerances,
}

impl Default for SliceOptions {
    fn default() -> Self {
        Self {
            x_max: 3.0,
            samples_per_side: 801,
            r_min_stop: 0.05,
            eps_space: 1e-10,
            horizon_collar: 1e-3,
            ode_rtol: 1e-13,
            ode_atol: 1e-15,
            tol: Tolerances::default(),
        }
    }
}

impl SliceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return Err(Error::Config(format!("X_max must be positive, got {}", self.x_max)));
        }
        if self.samples_per_side < 2 {
            return Err(Error::Config("samples_per_side must be at least 2".into()));
        }
        for (name, v) in [
            ("r_min_stop", self.r_min_stop),
            ("eps_space", self.eps_space),
            ("horizon_collar", self.horizon_collar),
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.tol.validate()
    }
}

/// Roots `r~+ <= R_H <= r~-` of `k~(H, r) = c` for `H <= 0`.
///
/// The plus root exists for `0 < c <= C_H`, the minus root for
/// `-8 M^3 H <= c <= C_H`; at the lower end the minus root is the horizon and
/// the slice runs through the bifurcation sphere.
pub fn branch_roots(p: &SliceParams, tol_root: f64) -> Result<BranchRoots> {
    p.validate()?;
    let m = p.m;
    if p.h > 0.0 {
        return Err(Error::NoSlice {
            h: p.h,
            c: p.c,
            reason: "branch roots are defined for H <= 0; use the reflected parameters".into(),
        });
    }
    let (r_max, c_max) = envelope_max(p.h, m)?;
    let c_horizon = -8.0 * m * m * m * p.h;
    let mut roots = BranchRoots {
        r_plus: None,
        r_minus: None,
        r_max,
        c_max,
    };
    if (p.c - c_max).abs() <= tol_root * c_max.abs().max(m * m) {
        roots.r_plus = Some(r_max);
        roots.r_minus = Some(r_max);
        return Ok(roots);
    }
    if p.c > c_max {
        return Err(Error::NoSlice {
            h: p.h,
            c: p.c,
            reason: format!("c exceeds the envelope maximum C_H = {c_max}"),
        });
    }
    let k = |r: f64| envelope_plus(p.h, r, m).map(|v| v - p.c).unwrap_or(f64::NAN);
    if p.c > 0.0 {
        roots.r_plus = Some(find_root_bracketed(k, 0.0, r_max, tol_root)?);
    }
    if p.c == c_horizon {
        roots.r_minus = Some(2.0 * m);
    } else if p.c > c_horizon {
        roots.r_minus = Some(find_root_bracketed(k, r_max, 2.0 * m, tol_root)?);
    }
    if roots.r_plus.is_none() && roots.r_minus.is_none() {
        return Err(Error::NoSlice {
            h: p.h,
            c: p.c,
            reason: format!(
                "need 0 < c <= {c_max} for the plus branch or {c_horizon} <= c <= {c_max} for the minus branch"
            ),
        });
    }
    Ok(roots)
}

/// Which half of the T-axis a slice is anchored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `T(0) <= 0`: anchored where `k~_H(r~) = c`.
    Lower,
    /// `T(0) >= 0`: the time-reflected construction, `k_H(r~) = c`.
    Upper,
}

impl Side {
    /// The side used by parameter-only constructors: upper iff `H > 0`.
    pub fn for_curvature(h: f64) -> Side {
        if h > 0.0 {
            Side::Upper
        } else {
            Side::Lower
        }
    }
}

/// `T` at `X = 0` for the slice anchored at areal radius `r_tilde`:
/// `-sqrt(2M - r~) e^(r~/4M)` on the lower side, its negative on the upper.
pub fn t_intercept_from_root(r_tilde: f64, side: Side, m: f64) -> f64 {
    let v = -(2.0 * m - r_tilde).max(0.0).sqrt() * (r_tilde / (4.0 * m)).exp();
    match side {
        Side::Lower => v,
        Side::Upper => -v,
    }
}

/// Anchor radius on the T-axis for the given parameters and branch. For
/// `H > 0` this is the root of the reflected parameters.
pub fn anchor_radius(p: &SliceParams, branch: Branch, tol_root: f64) -> Result<f64> {
    let base = if p.h > 0.0 { p.reflected() } else { *p };
    let roots = branch_roots(&base, tol_root)?;
    roots.get(branch).ok_or_else(|| Error::NoSlice {
        h: p.h,
        c: p.c,
        reason: format!(
            "no {} root (C_H = {}, horizon value {})",
            match branch {
                Branch::Plus => "plus",
                Branch::Minus => "minus",
            },
            roots.c_max,
            -8.0 * base.m.powi(3) * base.h
        ),
    })
}

/// T-intercept for a branch.
pub fn t_intercept(p: &SliceParams, branch: Branch, tol_root: f64) -> Result<f64> {
    let r = anchor_radius(p, branch, tol_root)?;
    Ok(t_intercept_from_root(r, Side::for_curvature(p.h), p.m))
}

/// `J = H r + c/r^2` and `q = h + J^2`.
fn j_and_q(r: f64, p: &SliceParams) -> Result<(f64, f64, f64)> {
    let h = lapse_h(r, p.m)?;
    let j = p.h * r + p.c / (r * r);
    Ok((h, j, h + j * j))
}

/// Slope `dt/dr = sigma J / (h sqrt(q))` of the Schwarzschild-coordinate graph.
pub fn fprime_first_integral(r: f64, p: &SliceParams, piece_sign: f64) -> Result<f64> {
    let (h, j, q) = j_and_q(r, p)?;
    if h == 0.0 {
        return Err(Error::Domain {
            quantity: "r",
            value: r,
            domain: "r != 2M (use the Kruskal generator at the horizon)",
        });
    }
    if !(q > 0.0) {
        return Err(Error::Domain {
            quantity: "h + (Hr + c/r^2)^2",
            value: q,
            domain: "(0, inf)",
        });
    }
    Ok(piece_sign.signum() * j / (h * q.sqrt()))
}

/// Analytic `(f', f'')` of the first integral.
pub fn first_integral_jet(r: f64, p: &SliceParams, piece_sign: f64) -> Result<(f64, f64)> {
    let fp = fprime_first_integral(r, p, piece_sign)?;
    let (h, j, q) = j_and_q(r, p)?;
    let dj = p.h - 2.0 * p.c / (r * r * r);
    let dh = 2.0 * p.m / (r * r);
    let dq = dh + 2.0 * j * dj;
    let sq = q.sqrt();
    let fpp = piece_sign.signum() * (dj / (h * sq) - j * (dh * sq + 0.5 * h * dq / sq) / (h * h * q));
    Ok((fp, fpp))
}

/// `T` on the slice at `X`, by cubic Hermite interpolation when slopes are
/// stored and 4-point Lagrange interpolation otherwise.
pub fn slice_t_at(s: &Hypersurface, x: f64) -> Result<f64> {
    let n = s.samples.len();
    let (lo, hi) = (s.samples[0].x, s.samples[n - 1].x);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange { x, lo, hi });
    }
    if n == 1 {
        return Ok(s.samples[0].t);
    }
    let i = s.samples.partition_point(|p| p.x <= x).clamp(1, n - 1) - 1;
    let (a, b) = (&s.samples[i], &s.samples[i + 1]);
    if x == a.x {
        return Ok(a.t);
    }
    if x == b.x {
        return Ok(b.t);
    }
    if let Some(slopes) = &s.slopes {
        let dx = b.x - a.x;
        let u = (x - a.x) / dx;
        let (u2, u3) = (u * u, u * u * u);
        return Ok((2.0 * u3 - 3.0 * u2 + 1.0) * a.t
            + (u3 - 2.0 * u2 + u) * dx * slopes[i]
            + (-2.0 * u3 + 3.0 * u2) * b.t
            + (u3 - u2) * dx * slopes[i + 1]);
    }
    let start = i.saturating_sub(1).min(n.saturating_sub(4));
    let idx = start..(start + 4).min(n);
    let mut total = 0.0;
    for j in idx.clone() {
        let mut w = 1.0;
        for k in idx.clone() {
            if k != j {
                w *= (x - s.samples[k].x) / (s.samples[j].x - s.samples[k].x);
            }
        }
        total += w * s.samples[j].t;
    }
    Ok(total)
}

/// Mirror image under `T -> -T`, with `(H, c) -> (-H, -c)`.
pub fn reflect_slice(s: &Hypersurface) -> Hypersurface {
    Hypersurface {
        params: s.params.reflected(),
        kind: s.kind,
        t_intercept: -s.t_intercept,
        samples: s
            .samples
            .iter()
            .map(|p| Sample {
                x: p.x,
                t: -p.t,
                r: p.r,
                region: p.region.time_reflected(),
            })
            .collect(),
        slopes: s.slopes.as_ref().map(|v| v.iter().map(|d| -d).collect()),
        generator: s.generator,
        end: s.end,
    }
}

/// `T = 0` on `[-X_max, X_max]`.
pub fn maximal_slice(m: f64, opts: &SliceOptions) -> Result<Hypersurface> {
    opts.validate()?;
    let params = SliceParams::new(m, 0.0, 0.0)?;
    let n = opts.samples_per_side - 1;
    let mut samples = Vec::with_capacity(2 * n + 1);
    for i in -(n as i64)..=(n as i64) {
        let x = opts.x_max * i as f64 / n as f64;
        samples.push(Sample {
            x,
            t: 0.0,
            r: crate::geometry::areal_radius_from_kruskal(0.0, x, m)?,
            region: crate::geometry::classify_region(0.0, x, m)?,
        });
    }
    Ok(Hypersurface {
        params,
        kind: SliceKind::Maximal,
        t_intercept: 0.0,
        slopes: Some(vec![0.0; samples.len()]),
        samples,
        generator: Generator::ClosedForm,
        end: SliceEnd::XMax,
    })
}

/// The hyperbola `X^2 - T^2 = (R_H - 2M) e^(R_H/2M)` for `H <= 0`.
pub fn cylinder_slice(h: f64, m: f64, opts: &SliceOptions) -> Result<Hypersurface> {
    opts.validate()?;
    let (r_h, c_h) = envelope_max(h, m)?;
    let s = (2.0 * m - r_h) * (r_h / (2.0 * m)).exp();
    let n = opts.samples_per_side - 1;
    let mut samples = Vec::with_capacity(2 * n + 1);
    let mut slopes = Vec::with_capacity(2 * n + 1);
    for i in -(n as i64)..=(n as i64) {
        let x = opts.x_max * i as f64 / n as f64;
        let q = (x * x + s).sqrt();
        samples.push(Sample {
            x,
            t: -q,
            r: r_h,
            region: Region::IIPrime,
        });
        slopes.push(-x / q);
    }
    Ok(Hypersurface {
        params: SliceParams::new(m, h, c_h)?,
        kind: SliceKind::Cylinder,
        t_intercept: -s.sqrt(),
        samples,
        slopes: Some(slopes),
        generator: Generator::ClosedForm,
        end: SliceEnd::XMax,
    })
}

/// Largest `|CMC residual|` over interior samples, with its `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max_abs: f64,
    pub at_x: f64,
    pub checked: usize,
}

/// Evaluates the Kruskal CMC residual at every interior sample. `F'` comes
/// from the stored slopes when present; `F''` is an 11-point
/// finite-difference derivative of `F'` on the sample grid.
pub fn max_kruskal_residual(s: &Hypersurface) -> Result<ResidualSummary> {
    let xs = s.xs();
    let fp = s.slope_values();
    let fpp = derivative_on_grid(&xs, &fp, 5);
    let mut out = ResidualSummary {
        max_abs: 0.0,
        at_x: f64::NAN,
        checked: 0,
    };
    let n = xs.len();
    for i in 1..n.saturating_sub(1) {
        let res = crate::geometry::cmc_residual_kruskal(
            s.samples[i].t,
            fp[i],
            fpp[i],
            xs[i],
            s.params.h,
            s.params.m,
        )?;
        out.checked += 1;
        if !(res.abs() <= out.max_abs) {
            out.max_abs = res.abs();
            out.at_x = xs[i];
        }
    }
    Ok(out)
}

/// Smallest `1 - F'^2` and smallest `1 - |dT/dX|` over consecutive pairs.
pub fn spacelike_margins(s: &Hypersurface) -> (f64, f64) {
    let slope_margin = s
        .slope_values()
        .iter()
        .map(|d| 1.0 - d * d)
        .fold(f64::INFINITY, f64::min);
    let chord_margin = s
        .samples
        .windows(2)
        .map(|w| 1.0 - ((w[1].t - w[0].t) / (w[1].x - w[0].x)).abs())
        .fold(f64::INFINITY, f64::min);
    (slope_margin, chord_margin)
}

/// Assembles the full slice from its `X >= 0` half by mirroring.
pub(crate) fn mirror_half(half: &[Sample], half_slopes: Option<&[f64]>) -> (Vec<Sample>, Option<Vec<f64>>) {
    let mut samples = Vec::with_capacity(2 * half.len());
    let mut slopes = half_slopes.map(|_| Vec::with_capacity(2 * half.len()));
    for (i, p) in half.iter().enumerate().rev() {
        if p.x == 0.0 {
            continue;
        }
        samples.push(Sample {
            x: -p.x,
            t: p.t,
            r: p.r,
            region: p.region.space_reflected(),
        });
        if let (Some(out), Some(src)) = (slopes.as_mut(), half_slopes) {
            out.push(-src[i]);
        }
    }
    for (i, p) in half.iter().enumerate() {
        samples.push(*p);
        if let (Some(out), Some(src)) = (slopes.as_mut(), half_slopes) {
            out.push(src[i]);
        }
    }
    (samples, slopes)
}


/// Largest `|T_quadrature - T_ivp|` over the quadrature samples inside the
/// IVP slice's range, with its `X`. Horizon-collar radii are never emitted by
/// the quadrature generator, so they are excluded automatically.
pub fn two_path_gap(p: &SliceParams, branch: Branch, n: usize, opts: &SliceOptions) -> Result<(f64, f64)> {
    let ivp = build_slice_ivp(p, branch, opts)?;
    let grid = quadrature_r_grid(p, branch, n, opts)?;
    let quad = build_slice_quadrature(p, branch, &grid, opts)?;
    let extent = ivp.x_extent();
    let mut worst = (0.0, f64::NAN);
    for q in quad.samples.iter().filter(|q| q.x.abs() <= extent) {
        let gap = (q.t - slice_t_at(&ivp, q.x)?).abs();
        if !(gap <= worst.0) {
            worst = (gap, q.x);
        }
    }
    Ok(worst)
}
