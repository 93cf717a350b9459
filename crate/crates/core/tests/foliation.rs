use kruskal_cmc::foliation::{
    alpha_curve_intersection, build_family, default_c_grid, leaf, locate, params_from_c, Family,
};
use kruskal_cmc::slice::{slice_t_at, SliceOptions};
use kruskal_cmc::{FoliationCurve, LeafBranch};

fn fc() -> FoliationCurve {
    FoliationCurve::default_profile(1.0).unwrap()
}

#[test]
fn leaf_table() {
    let expected = [
        (3.8125, 1.0, -2.8125, LeafBranch::Plus),
        (20.0, 0.150594, -5854.6, LeafBranch::Plus),
    ];
    for (c, r, h, branch) in expected {
        let lp = params_from_c(c, &fc(), 1e-12).unwrap();
        assert!((lp.r - r).abs() < 0.05 * r, "c = {c}: r = {}", lp.r);
        assert!((lp.h - h).abs() < 0.05 * h.abs(), "c = {c}: H = {}", lp.h);
        assert_eq!(lp.branch, branch);
    }
    let p = params_from_c(20.0, &fc(), 1e-12).unwrap();
    assert!((p.r - 0.150594).abs() < 1e-6);
    assert_eq!(params_from_c(0.5, &fc(), 1e-12).unwrap().branch, LeafBranch::Minus);
}

#[test]
fn branch_switches_at_the_alpha_point() {
    let a = alpha_curve_intersection(&fc()).unwrap();
    let above = params_from_c(a.c * 1.01, &fc(), 1e-12).unwrap();
    let below = params_from_c(a.c * 0.99, &fc(), 1e-12).unwrap();
    assert_eq!(above.branch, LeafBranch::Plus);
    assert_eq!(below.branch, LeafBranch::Minus);
}

#[test]
fn family_intercepts_decrease_with_c() {
    let opts = SliceOptions {
        samples_per_side: 101,
        ..SliceOptions::default()
    };
    let fam = build_family(&default_c_grid(1.0), &fc(), &opts).unwrap();
    assert_eq!(fam.len(), 41);
    for w in fam.windows(2) {
        assert!(w[0].1.t_intercept > w[1].1.t_intercept);
    }
    for (lp, s) in &fam {
        let upper = lp.family == Family::Upper;
        assert_eq!(s.t_intercept > 0.0, upper, "c = {}", lp.c);
    }
}

#[test]
fn locate_round_trips_through_emitted_samples() {
    let opts = SliceOptions::default();
    for c in [-20.0, -0.5, 0.05, 1.2, 20.0] {
        let s = leaf(c, &fc(), &opts).unwrap();
        let q = s.samples[s.samples.len() * 2 / 3];
        let l = locate(q.t, q.x, &fc(), 1e-9, &opts).unwrap();
        assert!((l.c - c).abs() < 1e-6 * c.abs().max(1.0), "{c}: {}", l.c);
        let back = slice_t_at(&leaf(l.c, &fc(), &opts).unwrap(), q.x).unwrap();
        assert!((back - q.t).abs() < 1e-8);
    }
}
