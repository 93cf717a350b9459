//! Finite-difference weights on arbitrary (non-uniform) grids.

/// Weights `w` such that `sum w[j] f(xs[j])` approximates the `order`-th
/// derivative of `f` at `x0` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > order, "need more than {order} nodes");
    // c[j][k]: weight of node j for derivative k.
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// First derivative of tabulated data at every node, using a centred window
/// of `2 * half_width + 1` points that is shifted inward at the ends.
pub fn derivative_on_grid(xs: &[f64], ys: &[f64], half_width: usize) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let width = (2 * half_width + 1).min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half_width).min(n - width);
            let window = start..start + width;
            let w = fornberg_weights(xs[i], &xs[window.clone()], 1);
            w.iter().zip(&ys[window]).map(|(a, b)| a * b).sum()
        })
        .collect()
}
