use kruskal_cmc::geometry::{areal_radius_from_kruskal, classify_region, kruskal_invariant};
use kruskal_cmc::slice::{
    build_slice_ivp, build_slice_quadrature, cylinder_slice, maximal_slice, quadrature_r_grid, reflect_slice,
    slice_t_at, spacelike_margins, Branch, SliceEnd, SliceKind, SliceOptions,
};
use kruskal_cmc::{Region, SliceParams};

fn p(h: f64, c: f64) -> SliceParams {
    SliceParams::new(1.0, h, c).unwrap()
}

#[test]
fn crossing_slice_spans_three_regions() {
    let s = build_slice_ivp(&p(0.0, 1.0), Branch::Minus, &SliceOptions::default()).unwrap();
    assert_eq!(s.kind, SliceKind::CrossingMinus);
    assert_eq!(s.end, SliceEnd::XMax);
    for region in [Region::IPrime, Region::IIPrime, Region::I] {
        assert!(s.samples.iter().any(|q| q.region == region), "{region}");
    }
    assert!(spacelike_margins(&s).1 > 0.0);
    for q in &s.samples {
        assert!((kruskal_invariant(q.r, 1.0) - (q.x * q.x - q.t * q.t)).abs() < 1e-8);
        assert_eq!(classify_region(q.t, q.x, 1.0).unwrap(), q.region);
    }
}

#[test]
fn plus_slice_stays_inside_and_stops_near_the_singularity() {
    let s = build_slice_ivp(&p(0.0, 1.0), Branch::Plus, &SliceOptions::default()).unwrap();
    assert_eq!(s.kind, SliceKind::InteriorPlus);
    assert!(s.samples.iter().all(|q| q.r < 2.0 && q.region == Region::IIPrime));
    let last = s.samples.last().unwrap();
    assert!(s.end != SliceEnd::XMax);
    assert!(last.r < 0.2, "{}", last.r);
}

#[test]
fn generators_share_the_intercept() {
    let opts = SliceOptions::default();
    let params = p(-0.5, 4.0);
    for branch in [Branch::Plus, Branch::Minus] {
        let ivp = build_slice_ivp(&params, branch, &opts).unwrap();
        let grid = quadrature_r_grid(&params, branch, 200, &opts).unwrap();
        let quad = build_slice_quadrature(&params, branch, &grid, &opts).unwrap();
        assert_eq!(ivp.t_intercept, quad.t_intercept);
        assert!((slice_t_at(&quad, 0.0).unwrap() - ivp.t_intercept).abs() < 1e-15);
    }
}

#[test]
fn closed_forms() {
    let opts = SliceOptions::default();
    let m = maximal_slice(1.0, &opts).unwrap();
    assert_eq!(slice_t_at(&m, 0.7).unwrap(), 0.0);
    assert_eq!(reflect_slice(&m).samples, m.samples.iter().map(|q| kruskal_cmc::Sample { t: -q.t, ..*q }).collect::<Vec<_>>());
    let cyl = cylinder_slice(0.0, 1.0, &opts).unwrap();
    for x in [0.0, 0.3, 1.9] {
        let expected = -(x * x + 0.5 * 0.75f64.exp()).sqrt();
        assert!((slice_t_at(&cyl, x).unwrap() - expected).abs() < 1e-9);
    }
}

#[test]
fn reflected_slice_has_positive_intercept() {
    let s = build_slice_ivp(&p(0.0, 1.0), Branch::Minus, &SliceOptions::default()).unwrap();
    let r = reflect_slice(&s);
    assert!((r.t_intercept - 0.634927).abs() < 1e-6);
    assert_eq!((r.params.h, r.params.c), (-0.0, -1.0));
    assert_eq!(reflect_slice(&r), s);
    let direct = build_slice_ivp(&p(0.0, -1.0), Branch::Minus, &SliceOptions::default());
    // H = 0 with c < 0 is below the lower family's range.
    assert!(direct.is_err());
}

#[test]
fn samples_are_ordered_and_inside_the_singularities() {
    let s = build_slice_ivp(&p(-2.0, 10.0), Branch::Plus, &SliceOptions::default()).unwrap();
    assert!(s.samples.windows(2).all(|w| w[0].x < w[1].x));
    for q in &s.samples {
        assert!(areal_radius_from_kruskal(q.t, q.x, 1.0).unwrap() > 0.0);
    }
}
