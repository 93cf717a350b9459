use super::*;
use crate::geometry::{envelope_plus, kruskal_invariant};
use crate::slice::{spacelike_margins, SliceOptions};

fn curve() -> FoliationCurve {
    FoliationCurve::default_profile(1.0).unwrap()
}

fn light() -> SliceOptions {
    SliceOptions {
        samples_per_side: 201,
        ..SliceOptions::default()
    }
}

#[test]
fn curve_boundary_value_is_exact() {
    assert_eq!(gamma_y(2.0, &curve()).unwrap(), 0.0);
    let shifted = FoliationCurve::new(1.0, 2.0, 12.0, 0.5).unwrap();
    assert_eq!(gamma_y(2.0, &shifted).unwrap(), 0.5);
    assert_eq!(upper_curve(2.0, &shifted).unwrap(), 0.5);
    let big = FoliationCurve::new(3.0, 2.0, 12.0 * 27.0, 0.0).unwrap();
    assert_eq!(gamma_y(6.0, &big).unwrap(), 0.0);
}

#[test]
fn curve_closed_form_values() {
    assert!((gamma_y(1.0, &curve()).unwrap() - 3.8125).abs() < 1e-14);
    let y = gamma_y(1e-3, &curve()).unwrap();
    assert!(y > 1e3);
    assert!((y - 3000.0).abs() < 1.0);
    let mut prev = 0.0;
    for k in 1..=4 {
        let v = gamma_y(2.0 * 10f64.powi(-k), &curve()).unwrap();
        assert!(v > 5.0 * prev);
        prev = v;
    }
}

#[test]
fn curve_domain_errors() {
    assert!(gamma_y(0.0, &curve()).is_err());
    assert!(gamma_y(2.1, &curve()).is_err());
    assert!(gamma_y_derivative(2.0, &curve()).is_err());
}

#[test]
fn derivative_matches_central_differences() {
    for fc in [curve(), FoliationCurve::new(1.0, 3.0, 40.0, 0.5).unwrap()] {
        for r in [0.05, 0.3, 0.9, 1.5, 1.9] {
            let dr = 1e-6;
            let fd = (gamma_y(r + dr, &fc).unwrap() - gamma_y(r - dr, &fc).unwrap()) / (2.0 * dr);
            let d = gamma_y_derivative(r, &fc).unwrap();
            assert!((d - fd).abs() < 1e-6 * d.abs().max(1.0), "r = {r}: {d} vs {fd}");
        }
    }
}

#[test]
fn g_peak_matches_grid_maximum() {
    let (r_star, g_max) = g_peak(1.0);
    assert!((g(r_star, 1.0) - g_max).abs() < 1e-14);
    assert!((g_max - 1.17996).abs() < 1e-5);
    let grid_max = (1..200_000)
        .map(|k| g(2.0 * k as f64 / 200_000.0, 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(grid_max <= g_max + 1e-12);
    assert!(g_max - grid_max < 1e-8);
    let zero_amplitude = FoliationCurve {
        m: 1.0,
        p: 2.0,
        amplitude: 0.0,
        a: 0.0,
    };
    assert!((gamma_y_derivative(r_star, &zero_amplitude).unwrap() - g_max).abs() < 1e-14);
}

#[test]
fn default_amplitude_certifies() {
    let c = default_amplitude(2.0, 1.0, 1.05).unwrap();
    // min of 3r^2/64 + 1/(4r^2) is 2 sqrt(3/256)
    let oracle = 1.05 * (6.0 * 3f64.sqrt() - 9.0).sqrt() / (2.0 * (3.0f64 / 256.0).sqrt());
    assert!((c - oracle).abs() < 1e-12);
    assert!((c - 5.7225).abs() < 1e-3);
    let fc = FoliationCurve::new(1.0, 2.0, c, 0.0).unwrap();
    assert!(fc.certify().max_derivative < 0.0);

    // p >= 3: bracket minimum sits at r = 2M.
    let c4 = default_amplitude(4.0, 1.0, 1.05).unwrap();
    let bracket_2m = (3.0 * 4.0 / 64.0 + 3.0 / 16.0) / 6.0;
    assert!((c4 - 1.05 * g_peak(1.0).1 / bracket_2m).abs() < 1e-12);
    assert!(FoliationCurve::new(1.0, 4.0, c4, 0.0).is_ok());

    assert!(default_amplitude(1.0, 1.0, 1.05).is_err());
    assert!(default_amplitude(2.0, 1.0, 1.0).is_err());
}

#[test]
fn weak_amplitude_is_rejected() {
    assert!(matches!(FoliationCurve::new(1.0, 2.0, 1.0, 0.0), Err(Error::InvalidCurve(_))));
    assert!(FoliationCurve::new(1.0, 0.5, 12.0, 0.0).is_err());
    let cert = curve().certify();
    assert!(cert.max_derivative < 0.0);
    assert_eq!(cert.points, CERTIFICATE_POINTS);
}

#[test]
fn params_at_table_points() {
    let fc = curve();
    let zero = params_from_c(0.0, &fc, 1e-12).unwrap();
    assert_eq!((zero.r, zero.h, zero.branch), (2.0, 0.0, LeafBranch::Maximal));

    let p = params_from_c(3.8125, &fc, 1e-12).unwrap();
    assert!((p.r - 1.0).abs() < 1e-13);
    assert!((p.h + 2.8125).abs() < 1e-11);
    assert_eq!((p.branch, p.family), (LeafBranch::Plus, Family::Lower));

    let q = params_from_c(-3.8125, &fc, 1e-12).unwrap();
    assert_eq!(q.r, p.r);
    assert_eq!(q.h, -p.h);
    assert_eq!(q.family, Family::Upper);

    let small = params_from_c(0.5, &fc, 1e-12).unwrap();
    assert_eq!(small.branch, LeafBranch::Minus);
}

#[test]
fn params_satisfy_envelope_relation_and_monotonicity() {
    let fc = curve();
    let grid = default_c_grid(1.0);
    assert_eq!(grid.len(), 41);
    let mut prev_h = f64::NEG_INFINITY;
    for &c in grid.iter().rev() {
        let lp = params_from_c(c, &fc, 1e-12).unwrap();
        assert!(lp.h > prev_h, "H not decreasing at c = {c}");
        prev_h = lp.h;
        let k = match lp.family {
            Family::Upper => crate::geometry::envelope_minus(lp.h, lp.r, 1.0).unwrap(),
            _ => envelope_plus(lp.h, lp.r, 1.0).unwrap(),
        };
        assert!((k - c).abs() <= 1e-12 * c.abs().max(1.0), "c = {c}: {k}");
    }
}

#[test]
fn leaf_intercepts() {
    let fc = curve();
    let opts = light();
    let s = leaf(3.8125, &fc, &opts).unwrap();
    assert!((s.t_intercept + 0.25f64.exp()).abs() < 1e-12);
    assert_eq!(s.kind, SliceKind::InteriorPlus);
    let up = leaf(-3.8125, &fc, &opts).unwrap();
    assert_eq!(up, reflect_slice(&s));
    let zero = leaf(0.0, &fc, &opts).unwrap();
    assert!(zero.samples.iter().all(|p| p.t == 0.0));
    for c in [0.1, 1.2, 20.0] {
        let lp = params_from_c(c, &fc, 1e-12).unwrap();
        let s = leaf(c, &fc, &opts).unwrap();
        let expected = -(2.0 - lp.r).sqrt() * (lp.r / 4.0).exp();
        assert!((s.t_intercept - expected).abs() < 1e-8);
        assert!(spacelike_margins(&s).1 > 0.0);
    }
}

#[test]
fn alpha_intersection_values() {
    let fc = curve();
    let a = alpha_curve_intersection(&fc).unwrap();
    assert!((a.r - 1.74209265733652).abs() < 1e-11);
    assert!((a.c - 1.89846423320888).abs() < 1e-11);
    assert!((a.h + 0.138213870713959).abs() < 1e-11);
    // Both curves agree at R.
    let alpha = stationary_envelope(a.r, 1.0).unwrap();
    assert!((gamma_y(a.r, &fc).unwrap() - alpha).abs() < 1e-12);
    // Exactly one sign change, positive to negative.
    let n = 20_000;
    let mut changes = 0;
    let mut prev = f64::NAN;
    for k in 1..n {
        let r = 2.0 * k as f64 / n as f64;
        let v = gamma_y(r, &fc).unwrap() - stationary_envelope(r, 1.0).unwrap();
        assert_eq!(v > 0.0, r < a.r, "r = {r}");
        if prev.is_finite() && (prev > 0.0) != (v > 0.0) {
            changes += 1;
        }
        prev = v;
    }
    assert_eq!(changes, 1);
}

#[test]
fn alpha_leaf_is_the_cylinder() {
    let fc = curve();
    let a = alpha_curve_intersection(&fc).unwrap();
    let lp = params_from_c(a.c, &fc, 1e-12).unwrap();
    assert_eq!(lp.branch, LeafBranch::Cylinder);
    let s = leaf(a.c, &fc, &light()).unwrap();
    assert_eq!(s.kind, SliceKind::Cylinder);
    let target = kruskal_invariant(a.r, 1.0);
    let worst = s
        .samples
        .iter()
        .map(|p| (p.x * p.x - p.t * p.t - target).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn curve_meets_each_envelope_once() {
    let fc = curve();
    let n = 10_000;
    for i in 0..=20 {
        let h = -5.0 * i as f64 / 20.0;
        let mut crossings = 0;
        let mut prev = f64::NAN;
        for k in 1..=n {
            let r = 2.0 * k as f64 / n as f64;
            let v = gamma_y(r, &fc).unwrap() - envelope_plus(h, r, 1.0).unwrap();
            if v == 0.0 || (prev.is_finite() && prev * v < 0.0) {
                crossings += 1;
            }
            prev = v;
        }
        assert_eq!(crossings, 1, "H = {h}");
    }
}

#[test]
fn bifurcation_family_shares_the_origin() {
    let opts = light();
    let hs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let fam = mo_linear_family(&hs, 1.0, &opts).unwrap();
    for s in &fam {
        assert!(s.t_intercept.abs() < 1e-8);
        assert!(slice_t_at(s, 0.0).unwrap().abs() < 1e-8);
    }
    // Ascending c means descending H.
    let ordered: Vec<(f64, &Hypersurface)> = fam.iter().rev().map(|s| (s.params.c, s)).collect();
    let d = ordering_margin(&ordered, &default_x_grid(1.0)).unwrap();
    assert!(!d.pass());
    assert!(d.min_margin.abs() < 1e-8);
}

#[test]
fn small_grid_is_ordered() {
    let fc = curve();
    let d = verify_disjointness(&fc, &[-2.0, 0.0, 2.0], &default_x_grid(1.0), &light()).unwrap();
    assert!(d.pass());
    assert!(d.min_margin > 0.0);
    let single = verify_disjointness(&fc, &[1.0], &default_x_grid(1.0), &light()).unwrap();
    assert!(single.pass());
    assert_eq!(single.comparisons, 0);
    assert!(verify_disjointness(&fc, &[1.0, 0.0], &[0.0], &light()).is_err());
}

#[test]
fn locate_known_points() {
    let fc = curve();
    let opts = SliceOptions::default();
    let z = locate(0.0, 1.2, &fc, 1e-6, &opts).unwrap();
    assert_eq!((z.c, z.h), (0.0, 0.0));
    let o = locate(0.0, 0.0, &fc, 1e-6, &opts).unwrap();
    assert_eq!(o.c, 0.0);

    let s = leaf(3.8125, &fc, &opts).unwrap();
    let p = s.samples[s.samples.len() / 2 + 100];
    let found = locate(p.t, p.x, &fc, 1e-6, &opts).unwrap();
    assert!((found.c - 3.8125).abs() < 1e-5, "{}", found.c);
    assert!(found.residual_t < 1e-6);

    let a = alpha_curve_intersection(&fc).unwrap();
    let w = kruskal_invariant(a.r, 1.0);
    let x = 0.7;
    let t = -(x * x - w).sqrt();
    let cyl = locate(t, x, &fc, 1e-6, &opts).unwrap();
    assert!((cyl.c - a.c).abs() < 1e-4, "{} vs {}", cyl.c, a.c);

    let up = locate(0.9, -0.4, &fc, 1e-6, &opts).unwrap();
    assert!(up.c < 0.0 && up.h > 0.0);

    assert!(matches!(
        locate(2.0, 0.0, &fc, 1e-6, &opts),
        Err(Error::BeyondSingularity { .. })
    ));
}

#[test]
fn reflection_closure_holds_only_for_symmetric_curves() {
    let opts = light();
    for c in [0.5, 3.8125] {
        assert!(reflection_closure(c, &curve(), &opts).unwrap() < 1e-8);
    }
    let shifted = FoliationCurve::new(1.0, 2.0, 12.0, 0.5).unwrap();
    assert!(reflection_closure(3.8125, &shifted, &opts).unwrap() > 1e-8);
}

#[test]
fn shifted_family_joins_at_the_horizon() {
    let fc = FoliationCurve::new(1.0, 2.0, 12.0, 0.5).unwrap();
    let (lower, upper) = shifted_curve_pair(&fc).unwrap();
    assert_eq!(gamma_y(2.0, &lower).unwrap(), -gamma_y(2.0, &upper).unwrap());
    let join = params_from_c(0.5, &fc, 1e-12).unwrap();
    assert_eq!(join.family, Family::Join);
    assert_eq!(join.h, -0.5 / 8.0);
    let s = leaf(0.5, &fc, &light()).unwrap();
    assert_eq!(s.t_intercept, 0.0);
    assert!(max_abs_t(&s) > 1e-3);

    let grid = [-3.0, -1.0, 0.0, 0.4, 0.5, 0.6, 2.0, 5.0];
    assert!(verify_disjointness(&fc, &grid, &default_x_grid(1.0), &light()).unwrap().pass());
    let mut prev = f64::INFINITY;
    for c in grid {
        let h = params_from_c(c, &fc, 1e-12).unwrap().h;
        assert!(h < prev);
        prev = h;
    }
}

fn max_abs_t(s: &Hypersurface) -> f64 {
    s.samples.iter().map(|p| p.t.abs()).fold(0.0, f64::max)
}
