//! Fixtures shared by the benchmarks.

use kruskal_cmc::slice::SliceOptions;
use kruskal_cmc::{FoliationCurve, SliceParams};

pub fn curve() -> FoliationCurve {
    FoliationCurve::default_profile(1.0).expect("default curve is valid")
}

pub fn options(samples_per_side: usize) -> SliceOptions {
    SliceOptions {
        samples_per_side,
        ..SliceOptions::default()
    }
}

/// `(H, c)` pairs spanning both branches and a deep interior slice.
pub fn slice_cases() -> Vec<(&'static str, SliceParams)> {
    [("h0_c1", 0.0, 1.0), ("h-1_c6", -1.0, 6.0), ("h-5_c20", -5.0, 20.0)]
        .into_iter()
        .map(|(name, h, c)| (name, SliceParams::new(1.0, h, c).expect("valid parameters")))
        .collect()
}

/// Every fourth value of the default grid.
pub fn sparse_c_grid() -> Vec<f64> {
    kruskal_cmc::foliation::default_c_grid(1.0).into_iter().step_by(4).collect()
}
