//! Verification suites: each check becomes a record with its worst value,
//! where it occurred, and the tolerance it was held to.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::{
    build_family, default_c_grid, default_x_grid, gamma_y, leaf, locate, mo_linear_family, ordering_margin,
    reflection_closure, FoliationCurve, LeafParams,
};
use crate::geometry::{
    areal_radius_from_kruskal, envelope_plus, kruskal_invariant, stationary_envelope, SliceParams,
};
use crate::slice::{max_kruskal_residual, spacelike_margins, two_path_gap, Branch, Hypersurface, SliceOptions};

/// Leaf parameters (in units of `M^2`) whose CMC residual is checked.
pub const RESIDUAL_C: [f64; 12] = [-100.0, -20.0, -3.8125, -1.2, -0.5, -0.1, 0.1, 0.5, 1.2, 3.8125, 20.0, 100.0];

/// Mean curvatures (in units of `1/M`) of the bifurcation-sphere family.
pub const MO_H: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Bound on the quadrature/IVP disagreement.
pub const CROSSCHECK_TOL: f64 = 1e-5;

/// `(H, c, branch)` cases for the quadrature/IVP comparison, at `M = 1`.
pub const CROSSCHECK_CASES: [(f64, f64, Branch); 3] =
    [(0.0, 1.0, Branch::Minus), (0.0, 1.0, Branch::Plus), (-1.0, 6.0, Branch::Plus)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub worst_value: f64,
    pub worst_location: String,
    pub tolerance: f64,
}

impl CheckRecord {
    /// Passes when `value < tol`.
    pub fn below(name: impl Into<String>, value: f64, location: impl Into<String>, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass: value < tol,
            worst_value: value,
            worst_location: location.into(),
            tolerance: tol,
        }
    }

    /// Passes when `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, location: impl Into<String>, bound: f64) -> Self {
        Self {
            name: name.into(),
            pass: value > bound,
            worst_value: value,
            worst_location: location.into(),
            tolerance: bound,
        }
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:e} at {} (tolerance {:e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.worst_value,
            self.worst_location,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: Suite, checks: Vec<CheckRecord>) -> Self {
        Self {
            suite,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Residual,
    Spacelike,
    Symmetry,
    Disjoint,
    Coverage,
    Crosscheck,
    Prop1,
    MoFamily,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Residual,
        Suite::Spacelike,
        Suite::Symmetry,
        Suite::Disjoint,
        Suite::Coverage,
        Suite::Crosscheck,
        Suite::Prop1,
        Suite::MoFamily,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Residual => "residual",
            Suite::Spacelike => "spacelike",
            Suite::Symmetry => "symmetry",
            Suite::Disjoint => "disjoint",
            Suite::Coverage => "coverage",
            Suite::Crosscheck => "crosscheck",
            Suite::Prop1 => "prop1",
            Suite::MoFamily => "mo-family",
            Suite::All => "all",
        }
    }

    fn needs_family(self) -> bool {
        matches!(
            self,
            Suite::Spacelike | Suite::Symmetry | Suite::Disjoint | Suite::Coverage | Suite::All
        )
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// Everything the suites read.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub curve: FoliationCurve,
    pub slice: SliceOptions,
    /// Ascending leaf parameters for the family checks.
    pub c_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub coverage_points: usize,
    pub seed: u64,
    pub locate_tol: f64,
}

impl VerifyConfig {
    pub fn new(curve: FoliationCurve) -> Self {
        let m = curve.m;
        Self {
            curve,
            slice: SliceOptions::default(),
            c_grid: default_c_grid(m),
            x_grid: default_x_grid(m),
            coverage_points: 50,
            seed: 20_240_601,
            locate_tol: 1e-6,
        }
    }

    fn m(&self) -> f64 {
        self.curve.m
    }
}

type Family = Vec<(LeafParams, Hypersurface)>;

/// Runs one suite (or all of them) and collects the records.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.slice.validate()?;
    let family = if suite.needs_family() {
        build_family(&cfg.c_grid, &cfg.curve, &cfg.slice)?
    } else {
        Vec::new()
    };
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Residual => residual_checks(cfg)?,
            Suite::Spacelike => spacelike_checks(&family, cfg)?,
            Suite::Symmetry => symmetry_checks(&family, cfg)?,
            Suite::Disjoint => disjoint_checks(&family, cfg)?,
            Suite::Coverage => coverage_checks(&family, cfg)?,
            Suite::Crosscheck => crosscheck_checks(cfg)?,
            Suite::Prop1 => prop1_checks(&cfg.curve)?,
            Suite::MoFamily => mo_family_checks(cfg)?,
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(VerificationReport::new(suite, checks))
}

/// One record per leaf in `RESIDUAL_C`: the largest CMC residual over its
/// interior samples.
pub fn residual_checks(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let m2 = cfg.m() * cfg.m();
    RESIDUAL_C
        .par_iter()
        .map(|&c| {
            let c = c * m2;
            let s = leaf(c, &cfg.curve, &cfg.slice)?;
            let r = max_kruskal_residual(&s)?;
            Ok(CheckRecord::below(
                format!("residual c={c}"),
                r.max_abs,
                format!("X={}", r.at_x),
                cfg.slice.tol.tol_resid,
            ))
        })
        .collect()
}

pub fn spacelike_checks(family: &Family, cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let m = cfg.m();
    let mut slope = (f64::INFINITY, f64::NAN);
    let mut chord = (f64::INFINITY, f64::NAN);
    let mut coord = (0.0f64, String::new());
    for (lp, s) in family {
        let (a, b) = spacelike_margins(s);
        if !(a >= slope.0) {
            slope = (a, lp.c);
        }
        if !(b >= chord.0) {
            chord = (b, lp.c);
        }
        for p in &s.samples {
            let d = (kruskal_invariant(p.r, m) - (p.x * p.x - p.t * p.t)).abs();
            if !(d <= coord.0) {
                coord = (d, format!("c={}, X={}", lp.c, p.x));
            }
        }
    }
    Ok(vec![
        CheckRecord::above("spacelike-slope", slope.0, format!("c={}", slope.1), 0.0),
        CheckRecord::above("spacelike-chord", chord.0, format!("c={}", chord.1), 0.0),
        CheckRecord::below("coordinate-consistency", coord.0, coord.1, cfg.slice.tol.tol_coord),
    ])
}

/// T-axis symmetry of every leaf, and reflection closure over the positive
/// part of the grid. For `A != 0` the family is not symmetric under
/// `T -> -T`, so the record asserts that closure fails.
pub fn symmetry_checks(family: &Family, cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let tol = cfg.slice.tol.tol_coord;
    let mut axis = (0.0f64, family.first().map_or(f64::NAN, |f| f.0.c));
    for (lp, s) in family {
        let n = s.samples.len();
        for i in 0..n / 2 {
            let (a, b) = (&s.samples[i], &s.samples[n - 1 - i]);
            let d = (a.t - b.t).abs().max((a.x + b.x).abs());
            if !(d <= axis.0) {
                axis = (d, lp.c);
            }
        }
    }
    let positive: Vec<f64> = cfg.c_grid.iter().copied().filter(|&c| c > 0.0).collect();
    let deviations: Vec<f64> = positive
        .par_iter()
        .map(|&c| reflection_closure(c, &cfg.curve, &cfg.slice))
        .collect::<Result<_>>()?;
    let (worst, at) = positive
        .iter()
        .zip(&deviations)
        .fold((0.0f64, f64::NAN), |acc, (&c, &d)| if d > acc.0 { (d, c) } else { acc });
    let closure = if cfg.curve.a == 0.0 {
        CheckRecord::below("reflection-closure", worst, format!("c={at}"), tol)
    } else {
        CheckRecord::above("reflection-asymmetry", worst, format!("c={at}"), tol)
    };
    Ok(vec![
        CheckRecord::below("t-axis-symmetry", axis.0, format!("c={}", axis.1), tol),
        closure,
    ])
}

pub fn disjoint_checks(family: &Family, cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let leaves: Vec<(f64, &Hypersurface)> = family.iter().map(|(lp, s)| (lp.c, s)).collect();
    let d = ordering_margin(&leaves, &cfg.x_grid)?;
    let location = match d.at {
        Some((c1, c2, x)) => format!("c1={c1}, c2={c2}, X={x}"),
        None => "no overlapping stations".into(),
    };
    let mut rec = CheckRecord::above("disjointness", d.min_margin, location, 0.0);
    rec.pass = d.pass();
    Ok(vec![rec])
}

/// Random points with `|T|, |X| <= 3M`, strictly inside the singularities and
/// with areal radius at least the slice stopping radius.
pub fn coverage_points(cfg: &VerifyConfig) -> Vec<(f64, f64)> {
    let m = cfg.m();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.coverage_points);
    while out.len() < cfg.coverage_points {
        let t = rng.gen_range(-3.0 * m..=3.0 * m);
        let x = rng.gen_range(-3.0 * m..=3.0 * m);
        if matches!(areal_radius_from_kruskal(t, x, m), Ok(r) if r >= cfg.slice.r_min_stop * m) {
            out.push((t, x));
        }
    }
    out
}

pub fn coverage_checks(family: &Family, cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let points = coverage_points(cfg);
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|&(t, x)| match locate(t, x, &cfg.curve, cfg.locate_tol, &cfg.slice) {
            Ok(l) => l.residual_t,
            Err(_) => f64::INFINITY,
        })
        .collect();
    let (mut worst, mut at) = (0.0f64, String::from("none"));
    for (&(t, x), &r) in points.iter().zip(&residuals) {
        if !(r <= worst) {
            worst = r;
            at = format!("T={t}, X={x}");
        }
    }
    let mut step = (f64::INFINITY, String::from("single leaf"));
    for w in family.windows(2) {
        let drop = w[0].0.h - w[1].0.h;
        if !(drop >= step.0) {
            step = (drop, format!("c1={}, c2={}", w[0].0.c, w[1].0.c));
        }
    }
    let mut monotone = CheckRecord::above("monotone-H", step.0, step.1, 0.0);
    monotone.pass = family.len() < 2 || step.0 > 0.0;
    Ok(vec![
        CheckRecord::below("locate-round-trip", worst, at, cfg.locate_tol),
        monotone,
    ])
}

pub fn crosscheck_checks(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let m = cfg.m();
    CROSSCHECK_CASES
        .par_iter()
        .map(|&(h, c, branch)| {
            let p = SliceParams::new(m, h / m, c * m * m)?;
            let (gap, x) = two_path_gap(&p, branch, 300, &cfg.slice)?;
            Ok(CheckRecord::below(
                format!("two-path H={} c={} {:?}", p.h, p.c, branch).to_lowercase(),
                gap,
                format!("X={x}"),
                CROSSCHECK_TOL,
            ))
        })
        .collect()
}

/// Sign changes of `f` along `values`, counting exact zeros.
fn crossings(values: impl Iterator<Item = f64>) -> usize {
    let mut prev = f64::NAN;
    let mut n = 0;
    for v in values {
        if v == 0.0 || prev * v < 0.0 {
            n += 1;
        }
        prev = v;
    }
    n
}

pub fn prop1_checks(fc: &FoliationCurve) -> Result<Vec<CheckRecord>> {
    let m = fc.m;
    let grid = |n: usize| (1..=n).map(move |k| 2.0 * m * k as f64 / n as f64);
    let mut out = Vec::new();

    let boundary = (gamma_y(2.0 * m, fc)? - fc.a).abs();
    let mut rec = CheckRecord::below("prop1-boundary", boundary, "r=2M", 0.0);
    rec.pass = boundary == 0.0;
    out.push(rec);

    let cert = fc.certify();
    out.push(CheckRecord::below(
        "prop1-derivative",
        cert.max_derivative,
        format!("r={} ({} points)", cert.at_r, cert.points),
        0.0,
    ));

    let r0 = 2e-3 * m;
    out.push(CheckRecord::above("prop1-blowup", gamma_y(r0, fc)?, format!("r={r0}"), 1e3 * m * m));

    let h_top = (-fc.a / (8.0 * m * m * m)).min(0.0);
    let counts: Vec<(f64, usize)> = (0..=20)
        .map(|i| {
            let h = -5.0 / m + (h_top + 5.0 / m) * i as f64 / 20.0;
            let gap = |r: f64| gamma_y(r, fc).unwrap_or(f64::NAN) - envelope_plus(h, r, m).unwrap_or(f64::NAN);
            (h, crossings(grid(10_000).map(gap)))
        })
        .collect();
    let worst = counts
        .iter()
        .copied()
        .max_by_key(|&(_, n)| n.abs_diff(1))
        .expect("non-empty H grid");
    out.push(CheckRecord {
        name: "prop1-envelope-crossings".into(),
        pass: counts.iter().all(|&(_, n)| n == 1),
        worst_value: worst.1 as f64,
        worst_location: format!("H={}", worst.0),
        tolerance: 1.0,
    });

    let n = crossings(
        grid(20_000)
            .filter(|&r| r < 2.0 * m)
            .map(|r| gamma_y(r, fc).unwrap_or(f64::NAN) - stationary_envelope(r, m).unwrap_or(f64::NAN)),
    );
    out.push(CheckRecord {
        name: "alpha-crossings".into(),
        pass: n == 1,
        worst_value: n as f64,
        worst_location: "(0, 2M)".into(),
        tolerance: 1.0,
    });
    Ok(out)
}

/// The bifurcation-sphere family: every slice passes through the origin, so
/// the family is not disjoint. Both records pass when that is what is seen.
pub fn mo_family_checks(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let m = cfg.m();
    let hs: Vec<f64> = MO_H.iter().map(|h| h / m).collect();
    let fam = mo_linear_family(&hs, m, &cfg.slice)?;
    let (origin, at) = fam
        .iter()
        .map(|s| (s.t_intercept.abs(), s.params.h))
        .fold((0.0f64, f64::NAN), |acc, v| if v.0 > acc.0 || acc.1.is_nan() { v } else { acc });
    // Ascending c is descending H.
    let ordered: Vec<(f64, &Hypersurface)> = fam.iter().rev().map(|s| (s.params.c, s)).collect();
    let d = ordering_margin(&ordered, &cfg.x_grid)?;
    let location = match d.at {
        Some((c1, c2, x)) => format!("c1={c1}, c2={c2}, X={x}"),
        None => "no overlapping stations".into(),
    };
    let mut crossing = CheckRecord::below("mo-not-disjoint", d.min_margin, location, 0.0);
    crossing.pass = !d.pass();
    Ok(vec![
        CheckRecord::below("mo-origin", origin, format!("H={at}"), cfg.slice.tol.tol_coord),
        crossing,
    ])
}
