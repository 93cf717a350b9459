//! Schwarzschild and Kruskal geometry: metric factor, envelope functions,
//! coordinate maps, region classification, and CMC residuals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::find_root_bracketed;
use crate::numerics::root::newton_bracketed;

/// The triple `(M, H, c)` naming one TSS-CMC slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceParams {
    /// Mass `M > 0`.
    pub m: f64,
    /// Mean curvature `H`.
    pub h: f64,
    /// Slice parameter `c`.
    pub c: f64,
}

impl SliceParams {
    pub fn new(m: f64, h: f64, c: f64) -> Result<Self> {
        let p = Self { m, h, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(domain("M", self.m, "(0, inf)"));
        }
        if !self.h.is_finite() {
            return Err(domain("H", self.h, "finite reals"));
        }
        if !self.c.is_finite() {
            return Err(domain("c", self.c, "finite reals"));
        }
        Ok(())
    }

    /// Parameters of the slice reflected through `T = 0`.
    pub fn reflected(&self) -> Self {
        Self {
            m: self.m,
            h: -self.h,
            c: -self.c,
        }
    }
}

/// Quadrant of the Kruskal plane, or one of the null/bifurcation markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "I'")]
    IPrime,
    #[serde(rename = "II'")]
    IIPrime,
    #[serde(rename = "horizon+")]
    HorizonFuture,
    #[serde(rename = "horizon-")]
    HorizonPast,
    #[serde(rename = "bifurcation")]
    Bifurcation,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::I,
        Region::II,
        Region::IPrime,
        Region::IIPrime,
        Region::HorizonFuture,
        Region::HorizonPast,
        Region::Bifurcation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::IPrime => "I'",
            Region::IIPrime => "II'",
            Region::HorizonFuture => "horizon+",
            Region::HorizonPast => "horizon-",
            Region::Bifurcation => "bifurcation",
        }
    }

    /// Image under `T -> -T`.
    pub fn time_reflected(self) -> Region {
        match self {
            Region::II => Region::IIPrime,
            Region::IIPrime => Region::II,
            Region::HorizonFuture => Region::HorizonPast,
            Region::HorizonPast => Region::HorizonFuture,
            other => other,
        }
    }

    /// Image under `X -> -X`.
    pub fn space_reflected(self) -> Region {
        match self {
            Region::I => Region::IPrime,
            Region::IPrime => Region::I,
            other => other,
        }
    }

    pub fn is_interior(self) -> bool {
        matches!(self, Region::II | Region::IIPrime)
    }

    pub fn is_exterior(self) -> bool {
        matches!(self, Region::I | Region::IPrime)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown region tag {s:?}")))
    }
}

/// A point of the Kruskal plane with its areal radius and region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalPoint {
    pub t: f64,
    pub x: f64,
    pub r: f64,
    pub region: Region,
}

impl KruskalPoint {
    pub fn new(t: f64, x: f64, m: f64) -> Result<Self> {
        Ok(Self {
            t,
            x,
            r: areal_radius_from_kruskal(t, x, m)?,
            region: classify_region(t, x, m)?,
        })
    }
}

fn check_mass(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(domain("M", m, "(0, inf)"))
    }
}

/// `h(r) = 1 - 2M/r`.
pub fn lapse_h(r: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain("r", r, "(0, inf)"));
    }
    Ok(1.0 - 2.0 * m / r)
}

/// `l(r) = (H r + c/r^2) / sqrt(-h(r))` on the interior `0 < r < 2M`.
pub fn radial_potential_l(r: f64, p: &SliceParams) -> Result<f64> {
    p.validate()?;
    if !(r > 0.0 && r < 2.0 * p.m) {
        return Err(domain("r", r, "(0, 2M)"));
    }
    let minus_h = 2.0 * p.m / r - 1.0;
    Ok((p.h * r + p.c / (r * r)) / minus_h.sqrt())
}

fn check_closed_interior(r: f64, m: f64) -> Result<()> {
    check_mass(m)?;
    if !(0.0..=2.0 * m).contains(&r) {
        return Err(domain("r", r, "[0, 2M]"));
    }
    Ok(())
}

/// `k~(H, r) = -H r^3 + r^(3/2) (2M - r)^(1/2)`.
pub fn envelope_plus(h: f64, r: f64, m: f64) -> Result<f64> {
    check_closed_interior(r, m)?;
    Ok(-h * r * r * r + r * (r * (2.0 * m - r)).sqrt())
}

/// `k(H, r) = -H r^3 - r^(3/2) (2M - r)^(1/2)`.
pub fn envelope_minus(h: f64, r: f64, m: f64) -> Result<f64> {
    check_closed_interior(r, m)?;
    Ok(-h * r * r * r - r * (r * (2.0 * m - r)).sqrt())
}

/// `dk~/dr` on the open interval `(0, 2M)`.
pub fn envelope_plus_slope(h: f64, r: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    if !(r > 0.0 && r < 2.0 * m) {
        return Err(domain("r", r, "(0, 2M)"));
    }
    Ok(-3.0 * h * r * r + r.sqrt() * (3.0 * m - 2.0 * r) / (2.0 * m - r).sqrt())
}

/// The mean curvature whose `k~` is stationary at `r`:
/// `(3M - 2r) / (3 r^(3/2) (2M - r)^(1/2))`.
pub fn stationary_curvature(r: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    if !(r > 0.0 && r < 2.0 * m) {
        return Err(domain("r", r, "(0, 2M)"));
    }
    Ok((3.0 * m - 2.0 * r) / (3.0 * r * (r * (2.0 * m - r)).sqrt()))
}

/// Value of `k~` along its stationary locus,
/// `r^(3/2) (3M - r) / (3 (2M - r)^(1/2))`.
pub fn stationary_envelope(r: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    if !(r > 0.0 && r < 2.0 * m) {
        return Err(domain("r", r, "(0, 2M)"));
    }
    Ok(r * r.sqrt() * (3.0 * m - r) / (3.0 * (2.0 * m - r).sqrt()))
}

/// Location `R_H` and value `C_H` of the maximum of `k~(H, .)` over `[0, 2M]`
/// for `H <= 0`.
///
/// The stationarity condition is solved in `u = sqrt(2M - r)`, which keeps the
/// answer resolved when `R_H` sits within rounding distance of the horizon.
pub fn envelope_max(h: f64, m: f64) -> Result<(f64, f64)> {
    check_mass(m)?;
    if !(h <= 0.0) {
        return Err(domain("H", h, "(-inf, 0]"));
    }
    if h == 0.0 {
        let r = 1.5 * m;
        return Ok((r, envelope_plus(0.0, r, m)?));
    }
    let phi = |u: f64| {
        let r = 2.0 * m - u * u;
        -3.0 * h * r * r * u + r.sqrt() * (3.0 * m - 2.0 * r)
    };
    let u = find_root_bracketed(phi, 0.0, (0.5 * m).sqrt(), 1e-16)?;
    let r = 2.0 * m - u * u;
    // Expand r^3 about 2M so the excess over k~(H, 2M) = -8 M^3 H survives
    // rounding when u is tiny.
    let u2 = u * u;
    let excess = r * r.sqrt() * u + h * u2 * (12.0 * m * m - 6.0 * m * u2 + u2 * u2);
    Ok((r, -8.0 * h * m * m * m + excess))
}

/// `(r - 2M) e^(r/2M)`, the value of `X^2 - T^2` on the sphere of radius `r`.
pub fn kruskal_invariant(r: f64, m: f64) -> f64 {
    (r - 2.0 * m) * (r / (2.0 * m)).exp()
}

/// `psi(rho) = (rho - 1) e^rho + 1` with its derivative `rho e^rho`; a series
/// is used near zero where the closed form cancels.
fn psi(rho: f64) -> (f64, f64) {
    let e = rho.exp();
    if rho < 0.1 {
        // sum_{n >= 2} (n - 1) rho^n / n!
        let mut term = rho;
        let mut sum = 0.0;
        for n in 2..30 {
            term *= rho / n as f64;
            let add = (n - 1) as f64 * term;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        (sum, rho * e)
    } else {
        ((rho - 1.0) * e + 1.0, rho * e)
    }
}

/// Unique `r >= 0` with `(r - 2M) e^(r/2M) = X^2 - T^2`.
pub fn areal_radius_from_kruskal(t: f64, x: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    if !(t.is_finite() && x.is_finite()) {
        return Err(Error::BeyondSingularity { t, x });
    }
    let w = (x - t) * (x + t);
    areal_radius_from_invariant(w, m).map_err(|_| Error::BeyondSingularity { t, x })
}

/// Inverse of [`kruskal_invariant`].
pub fn areal_radius_from_invariant(w: f64, m: f64) -> Result<f64> {
    check_mass(m)?;
    let target = w / (2.0 * m) + 1.0;
    if !(target >= 0.0) {
        return Err(domain("X^2 - T^2", w, "[-2M, inf)"));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    if w == 0.0 {
        return Ok(2.0 * m);
    }
    let mut hi = 2.0;
    while psi(hi).0 < target {
        hi *= 2.0;
    }
    let guess = if target < 0.5 {
        (2.0 * target).sqrt()
    } else {
        // Leading-order inversion of (rho - 1) e^rho ~ target - 1.
        1.0 + (w / (2.0 * m * std::f64::consts::E)).clamp(-0.99, 1e300).ln_1p().max(0.0)
    };
    let rho = newton_bracketed(
        |rho| {
            let (v, d) = psi(rho);
            (v - target, d)
        },
        0.0,
        hi,
        guess.clamp(0.0, hi),
        1e-16,
    );
    Ok(2.0 * m * rho)
}

/// Explicit `(t, r) -> (T, X)` maps for the four quadrants.
pub fn kruskal_from_schwarzschild(t: f64, r: f64, region: Region, m: f64) -> Result<(f64, f64)> {
    check_mass(m)?;
    if !t.is_finite() {
        return Err(domain("t", t, "finite reals"));
    }
    let a = t / (4.0 * m);
    let e = (r / (4.0 * m)).exp();
    match region {
        Region::I | Region::IPrime => {
            if !(r > 2.0 * m) {
                return Err(domain("r", r, "(2M, inf) for an exterior region"));
            }
            let s = (r - 2.0 * m).sqrt() * e;
            let (tt, xx) = (s * a.sinh(), s * a.cosh());
            Ok(if region == Region::I { (tt, xx) } else { (-tt, -xx) })
        }
        Region::II | Region::IIPrime => {
            if !(r > 0.0 && r < 2.0 * m) {
                return Err(domain("r", r, "(0, 2M) for an interior region"));
            }
            let s = (2.0 * m - r).sqrt() * e;
            let (tt, xx) = (s * a.cosh(), s * a.sinh());
            Ok(if region == Region::II { (tt, xx) } else { (-tt, -xx) })
        }
        _ => Err(Error::Config(format!(
            "region {region} has no Schwarzschild chart"
        ))),
    }
}

/// Quadrant of `(T, X)` by exact sign tests.
pub fn classify_region(t: f64, x: f64, m: f64) -> Result<Region> {
    check_mass(m)?;
    if !(t.is_finite() && x.is_finite()) || (x - t) * (x + t) < -2.0 * m {
        return Err(Error::BeyondSingularity { t, x });
    }
    let (at, ax) = (t.abs(), x.abs());
    Ok(if t == 0.0 && x == 0.0 {
        Region::Bifurcation
    } else if x > at {
        Region::I
    } else if x < -at {
        Region::IPrime
    } else if t > ax {
        Region::II
    } else if t < -ax {
        Region::IIPrime
    } else if t > 0.0 {
        Region::HorizonFuture
    } else {
        Region::HorizonPast
    })
}

/// The two terms of the Kruskal-coordinate CMC equation,
/// `F'' + geometric(F, F', X) - curvature(F') = 0`.
fn kruskal_terms(f: f64, fp: f64, x: f64, h: f64, m: f64) -> Result<(f64, f64)> {
    check_mass(m)?;
    let margin = 1.0 - fp * fp;
    if !(margin > 0.0) {
        return Err(Error::NotSpacelike { margin });
    }
    let r = areal_radius_from_kruskal(f, x, m)?;
    if !(r > 0.0) {
        return Err(Error::BeyondSingularity { t: f, x });
    }
    let geometric =
        (-r / (2.0 * m)).exp() * (6.0 * m / (r * r) - 1.0 / r) * (-f + fp * x) * margin;
    let curvature =
        12.0 * h * m * (-r / (4.0 * m)).exp() / r.sqrt() * margin * margin.sqrt();
    Ok((geometric, curvature))
}

/// `F''` demanded by the CMC equation at the jet `(X, F, F')`.
pub fn cmc_rhs_kruskal(f: f64, fp: f64, x: f64, h: f64, m: f64) -> Result<f64> {
    let (geometric, curvature) = kruskal_terms(f, fp, x, h, m)?;
    Ok(curvature - geometric)
}

/// Left-hand side of the CMC equation for the graph `T = F(X)`:
/// `F'' + e^(-r/2M) (6M/r^2 - 1/r)(-F + F'X)(1 - F'^2)
///  - 12 H M e^(-r/4M) r^(-1/2) (1 - F'^2)^(3/2)`,
/// with `H` measured against the future-pointing normal.
pub fn cmc_residual_kruskal(f: f64, fp: f64, fpp: f64, x: f64, h: f64, m: f64) -> Result<f64> {
    let (geometric, curvature) = kruskal_terms(f, fp, x, h, m)?;
    Ok(fpp + geometric - curvature)
}

/// Sign in front of the curvature term of the Schwarzschild-coordinate
/// equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Left-hand side of the CMC equation for `t = f(r)`:
/// `f'' + ((1/h - f'^2 h)(2h/r + h'/2) + h'/h) f' ± 3H (1/h - f'^2 h)^(3/2)`.
pub fn cmc_residual_schwarzschild(
    fp: f64,
    fpp: f64,
    r: f64,
    h_mean: f64,
    m: f64,
    sign: Sign,
) -> Result<f64> {
    let h = lapse_h(r, m)?;
    if h == 0.0 {
        return Err(domain("r", r, "r != 2M"));
    }
    let dh = 2.0 * m / (r * r);
    let space = 1.0 / h - fp * fp * h;
    if !(space > 0.0) {
        return Err(Error::NotSpacelike { margin: space });
    }
    Ok(fpp
        + (space * (2.0 * h / r + 0.5 * dh) + dh / h) * fp
        + sign.value() * 3.0 * h_mean * space * space.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lapse_values() {
        assert_eq!(lapse_h(2.0, 1.0).unwrap(), 0.0);
        assert!(close(lapse_h(3.0, 1.0).unwrap(), 1.0 / 3.0, 1e-16));
        assert_eq!(lapse_h(1.0, 1.0).unwrap(), -1.0);
        assert!(lapse_h(0.0, 1.0).is_err());
        assert!(lapse_h(-1.0, 1.0).is_err());
    }

    #[test]
    fn potential_values() {
        let p = SliceParams::new(1.0, 0.0, 1.0).unwrap();
        assert!(close(radial_potential_l(1.0, &p).unwrap(), 1.0, 1e-15));
        let p = SliceParams::new(1.0, 0.0, 2.0).unwrap();
        assert!(close(radial_potential_l(1.0, &p).unwrap(), 2.0, 1e-15));
        let near = radial_potential_l(2.0 - 1e-12, &p).unwrap();
        assert!(near > 1e5);
        assert!(radial_potential_l(2.0, &p).is_err());
        assert!(radial_potential_l(0.0, &p).is_err());
    }

    #[test]
    fn envelope_values() {
        for h in [-3.0, 0.0, 0.7] {
            assert!(close(envelope_plus(h, 2.0, 1.0).unwrap(), -8.0 * h, 1e-14));
            assert!(close(envelope_minus(h, 2.0, 1.0).unwrap(), -8.0 * h, 1e-14));
            assert_eq!(envelope_plus(h, 0.0, 1.0).unwrap(), 0.0);
        }
        let v = envelope_plus(0.0, 1.5, 1.0).unwrap();
        assert!(close(v, 3.0 * 3f64.sqrt() / 4.0, 1e-14));
        assert!(close(envelope_minus(0.0, 1.5, 1.0).unwrap(), -v, 0.0));
        assert_eq!(
            envelope_minus(0.7, 0.9, 1.0).unwrap(),
            -envelope_plus(-0.7, 0.9, 1.0).unwrap()
        );
        assert!(envelope_plus(0.0, 2.1, 1.0).is_err());
        assert!(envelope_plus(0.0, -0.1, 1.0).is_err());
    }

    fn grid_max(h: f64) -> (f64, f64) {
        let n = 2_000_000;
        (0..=n)
            .map(|i| {
                let r = 2.0 * i as f64 / n as f64;
                (r, envelope_plus(h, r, 1.0).unwrap())
            })
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    }

    #[test]
    fn envelope_max_matches_grid() {
        let (r, c) = envelope_max(0.0, 1.0).unwrap();
        assert!(close(r, 1.5, 1e-12));
        assert!(close(c, 3.0 * 3f64.sqrt() / 4.0, 1e-12));
        for h in [-0.3, -1.0, -4.0] {
            let (r, c) = envelope_max(h, 1.0).unwrap();
            let (gr, gc) = grid_max(h);
            assert!(c >= gc - 1e-14, "H={h}: {c} < grid {gc}");
            assert!(close(r, gr, 2e-5), "H={h}: {r} vs {gr}");
            assert!(r > 1.5 && r < 2.0);
            assert!(envelope_plus(h, (r + 1e-3).min(2.0), 1.0).unwrap() < c);
            assert!(envelope_plus(h, r - 1e-3, 1.0).unwrap() < c);
        }
        let (_, c) = envelope_max(-1.0, 1.0).unwrap();
        assert!(c > 8.0);
        assert!(envelope_max(0.1, 1.0).is_err());
    }

    #[test]
    fn envelope_max_is_stationary() {
        for h in [-0.01, -0.5, -2.0, -50.0] {
            let (r, _) = envelope_max(h, 1.0).unwrap();
            let slope = envelope_plus_slope(h, r, 1.0).unwrap();
            let scale = 3.0 * h.abs() * r * r;
            assert!(slope.abs() < 1e-9 * scale.max(1.0), "H={h}: slope {slope}");
            let d = 1e-4 * (2.0 - r).min(0.1);
            let second = envelope_plus(h, r + d, 1.0).unwrap() - 2.0 * envelope_plus(h, r, 1.0).unwrap()
                + envelope_plus(h, r - d, 1.0).unwrap();
            assert!(second <= 1e-15);
        }
    }

    #[test]
    fn envelope_max_extreme_curvature_stays_below_horizon() {
        let (r, c) = envelope_max(-1e7, 1.0).unwrap();
        assert!(r < 2.0);
        assert!(c >= 8e7);
        assert!(c >= envelope_plus(-1e7, 2.0, 1.0).unwrap());
    }

    #[test]
    fn stationary_locus_consistency() {
        for r in [0.3, 1.0, 1.5, 1.9] {
            let h = stationary_curvature(r, 1.0).unwrap();
            assert!(envelope_plus_slope(h, r, 1.0).unwrap().abs() < 1e-12);
            assert!(close(
                stationary_envelope(r, 1.0).unwrap(),
                envelope_plus(h, r, 1.0).unwrap(),
                1e-13
            ));
        }
    }

    #[test]
    fn areal_radius_anchors() {
        assert_eq!(areal_radius_from_kruskal(0.0, 0.0, 1.0).unwrap(), 2.0);
        assert_eq!(areal_radius_from_invariant(-2.0, 1.0).unwrap(), 0.0);
        // Bisection oracle on the increasing map, then a forward check.
        let e = std::f64::consts::E;
        let (mut a, mut b) = (2.0f64, 4.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if kruskal_invariant(mid, 1.0) < e {
                a = mid;
            } else {
                b = mid;
            }
        }
        let r = areal_radius_from_invariant(e, 1.0).unwrap();
        assert!(close(r, a, 1e-13));
        assert!(close(r, 2.7035, 1e-4));
        assert!(close(kruskal_invariant(r, 1.0), e, 1e-13));
        assert!(matches!(
            areal_radius_from_kruskal(2.0, 0.0, 1.0),
            Err(Error::BeyondSingularity { .. })
        ));
    }

    #[test]
    fn areal_radius_inverts_on_grid() {
        for m in [1.0, 0.5, 3.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=4000 {
                let r = 8.0 * m * i as f64 / 4000.0;
                let w = kruskal_invariant(r, m);
                assert!(w > prev);
                prev = w;
                let back = areal_radius_from_invariant(w, m).unwrap();
                assert!(close(back, r, 1e-12 * m.max(r)), "m={m} r={r} back={back}");
            }
        }
    }

    #[test]
    fn region_maps_anchor_points() {
        let (t, x) = kruskal_from_schwarzschild(0.0, 1.84, Region::IIPrime, 1.0).unwrap();
        assert!(close(t, -(0.16f64).sqrt() * 0.46f64.exp(), 1e-15));
        assert_eq!(x, 0.0);
        let (t, x) = kruskal_from_schwarzschild(0.0, 3.0, Region::I, 1.0).unwrap();
        assert_eq!(t, 0.0);
        assert!(close(x, 0.75f64.exp(), 1e-15));
        assert!(kruskal_from_schwarzschild(0.0, 3.0, Region::II, 1.0).is_err());
        assert!(kruskal_from_schwarzschild(0.0, 1.0, Region::I, 1.0).is_err());
        assert!(kruskal_from_schwarzschild(0.0, 1.0, Region::Bifurcation, 1.0).is_err());
    }

    #[test]
    fn region_maps_satisfy_both_relations() {
        let m = 1.0;
        for region in [Region::I, Region::IPrime, Region::II, Region::IIPrime] {
            for &t in &[-6.0, -1.3, 0.0, 0.4, 5.0] {
                for &r in &[0.2, 1.0, 1.9, 2.1, 3.0, 7.5] {
                    let Ok((tt, xx)) = kruskal_from_schwarzschild(t, r, region, m) else {
                        continue;
                    };
                    assert_eq!(classify_region(tt, xx, m).unwrap(), region);
                    let w = kruskal_invariant(r, m);
                    assert!(close((xx - tt) * (xx + tt), w, 1e-8 * w.abs().max(1.0)));
                    assert!(close(areal_radius_from_kruskal(tt, xx, m).unwrap(), r, 1e-8));
                    let log_form = ((xx + tt) / (xx - tt)).abs().ln();
                    assert!(close(log_form, t / (2.0 * m), 1e-8), "{region} t={t} r={r}");
                }
            }
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify_region(0.0, 1.0, 1.0).unwrap(), Region::I);
        assert_eq!(classify_region(-1.0, 0.0, 1.0).unwrap(), Region::IIPrime);
        assert_eq!(classify_region(1.0, 0.0, 1.0).unwrap(), Region::II);
        assert_eq!(classify_region(0.0, -1.0, 1.0).unwrap(), Region::IPrime);
        assert_eq!(classify_region(0.0, 0.0, 1.0).unwrap(), Region::Bifurcation);
        assert_eq!(classify_region(0.5, 0.5, 1.0).unwrap(), Region::HorizonFuture);
        assert_eq!(classify_region(-0.5, 0.5, 1.0).unwrap(), Region::HorizonPast);
        assert!(classify_region(3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn region_strings_round_trip() {
        for r in Region::ALL {
            assert_eq!(r.to_string().parse::<Region>().unwrap(), r);
            assert_eq!(r.time_reflected().time_reflected(), r);
        }
        assert!("III".parse::<Region>().is_err());
    }

    #[test]
    fn kruskal_residual_on_maximal_slice() {
        for x in [0.0, 0.4, 1.3, 2.9] {
            assert_eq!(cmc_residual_kruskal(0.0, 0.0, 0.0, x, 0.0, 1.0).unwrap(), 0.0);
        }
        let eps = 1e-7;
        assert_eq!(cmc_residual_kruskal(0.0, 0.0, eps, 1.3, 0.0, 1.0).unwrap(), eps);
        assert!(matches!(
            cmc_residual_kruskal(0.0, 1.0, 0.0, 1.0, 0.0, 1.0),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn kruskal_residual_on_cylinder() {
        for h in [0.0, -0.2, -1.0, -3.0] {
            let (rr, _) = envelope_max(h, 1.0).unwrap();
            let s = (2.0 - rr) * (rr / 2.0).exp();
            for x in [0.0, 0.3, 1.0, 2.5] {
                let q = (x * x + s).sqrt();
                let f = -q;
                let fp = -x / q;
                let fpp = -s / (q * q * q);
                let res = cmc_residual_kruskal(f, fp, fpp, x, h, 1.0).unwrap();
                assert!(res.abs() < 1e-12, "H={h} X={x}: {res}");
            }
        }
    }

    #[test]
    fn schwarzschild_residual_identities() {
        assert_eq!(cmc_residual_schwarzschild(0.0, 0.0, 3.0, 0.0, 1.0, Sign::Plus).unwrap(), 0.0);
        let (fp, fpp, r, h) = (0.3, -0.2, 3.5, -0.4);
        let a = cmc_residual_schwarzschild(fp, fpp, r, h, 1.0, Sign::Plus).unwrap();
        let b = cmc_residual_schwarzschild(fp, fpp, r, h, 1.0, Sign::Minus).unwrap();
        let hh = lapse_h(r, 1.0).unwrap();
        let space = 1.0 / hh - fp * fp * hh;
        assert!(close(a - b, 6.0 * h * space.powf(1.5), 1e-14));
        assert!(cmc_residual_schwarzschild(0.0, 0.0, 2.0, 0.0, 1.0, Sign::Plus).is_err());
        assert!(cmc_residual_schwarzschild(4.0, 0.0, 3.0, 0.0, 1.0, Sign::Plus).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn envelope_symmetry(h in -10.0f64..10.0, r in 0.0f64..2.0) {
                prop_assert_eq!(envelope_minus(h, r, 1.0).unwrap(), -envelope_plus(-h, r, 1.0).unwrap());
            }

            #[test]
            fn radius_round_trip(t in -3.0f64..3.0, x in -3.0f64..3.0) {
                prop_assume!((x - t) * (x + t) > -2.0 + 1e-9);
                let r = areal_radius_from_kruskal(t, x, 1.0).unwrap();
                let w = (x - t) * (x + t);
                prop_assert!((kruskal_invariant(r, 1.0) - w).abs() <= 1e-8 * w.abs().max(1.0));
            }

            #[test]
            fn schwarzschild_round_trip(t in -10.0f64..10.0, r in 0.01f64..8.0) {
                prop_assume!((r - 2.0).abs() > 1e-6);
                let region = if r > 2.0 { Region::I } else { Region::II };
                let (tt, xx) = kruskal_from_schwarzschild(t, r, region, 1.0).unwrap();
                let back = areal_radius_from_kruskal(tt, xx, 1.0).unwrap();
                prop_assert!((back - r).abs() < 1e-8 * r.max(1.0));
            }
        }
    }
}
