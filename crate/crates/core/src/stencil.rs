//! Finite-difference weights on uniform 1-D grids.

/// First derivative, 4th order: weights for node `i` of an `n`-node grid.
/// Returns (first node index, weights) with weights already divided by h.
pub fn d1_order4(i: usize, n: usize, h: f64) -> (usize, [f64; 5]) {
    assert!(n >= 5, "4th-order stencil needs 5 nodes");
    let s = 1.0 / (12.0 * h);
    if i == 0 {
        (0, [-25.0 * s, 48.0 * s, -36.0 * s, 16.0 * s, -3.0 * s])
    } else if i == 1 {
        (0, [-3.0 * s, -10.0 * s, 18.0 * s, -6.0 * s, 1.0 * s])
    } else if i == n - 2 {
        (n - 5, [-s, 6.0 * s, -18.0 * s, 10.0 * s, 3.0 * s])
    } else if i == n - 1 {
        (n - 5, [3.0 * s, -16.0 * s, 36.0 * s, -48.0 * s, 25.0 * s])
    } else {
        (i - 2, [s, -8.0 * s, 0.0, 8.0 * s, -s])
    }
}

/// First derivative, 2nd order.
pub fn d1_order2(i: usize, n: usize, h: f64) -> (usize, [f64; 3]) {
    assert!(n >= 3, "2nd-order stencil needs 3 nodes");
    let s = 0.5 / h;
    if i == 0 {
        (0, [-3.0 * s, 4.0 * s, -s])
    } else if i == n - 1 {
        (n - 3, [s, -4.0 * s, 3.0 * s])
    } else {
        (i - 1, [-s, 0.0, s])
    }
}

/// Forward-biased first derivative, 2nd order: does not annihilate (-1)^j.
pub fn d1_forward2(i: usize, n: usize, h: f64) -> (usize, [f64; 3]) {
    assert!(n >= 3);
    let s = 0.5 / h;
    if i + 2 < n {
        (i, [-3.0 * s, 4.0 * s, -s])
    } else if i + 1 < n {
        (i - 1, [-s, 0.0, s])
    } else {
        (n - 3, [s, -4.0 * s, 3.0 * s])
    }
}

/// Second derivative, 2nd order (one-sided 4-point at the ends).
pub fn d2_order2(i: usize, n: usize, h: f64) -> (usize, [f64; 4]) {
    assert!(n >= 4);
    let s = 1.0 / (h * h);
    if i == 0 {
        (0, [2.0 * s, -5.0 * s, 4.0 * s, -s])
    } else if i == n - 1 {
        (n - 4, [-s, 4.0 * s, -5.0 * s, 2.0 * s])
    } else {
        (i - 1, [s, -2.0 * s, s, 0.0])
    }
}

/// Second derivative, 4th order (central with one-sided 6-point ends).
pub fn d2_order4(i: usize, n: usize, h: f64) -> (usize, [f64; 6]) {
    assert!(n >= 6);
    let s = 1.0 / (12.0 * h * h);
    if i == 0 {
        (0, [45.0 * s, -154.0 * s, 214.0 * s, -156.0 * s, 61.0 * s, -10.0 * s])
    } else if i == 1 {
        (0, [10.0 * s, -15.0 * s, -4.0 * s, 14.0 * s, -6.0 * s, s])
    } else if i == n - 2 {
        (n - 6, [s, -6.0 * s, 14.0 * s, -4.0 * s, -15.0 * s, 10.0 * s])
    } else if i == n - 1 {
        (n - 6, [-10.0 * s, 61.0 * s, -156.0 * s, 214.0 * s, -154.0 * s, 45.0 * s])
    } else {
        (i - 2, [-s, 16.0 * s, -30.0 * s, 16.0 * s, -s, 0.0])
    }
}

/// Apply a stencil to samples.
#[inline]
pub fn apply(start: usize, w: &[f64], f: &[f64]) -> f64 {
    let end = (start + w.len()).min(f.len());
    w.iter().zip(&f[start..end]).map(|(a, b)| a * b).sum()
}

/// Differentiate a whole uniform sample vector (4th order).
pub fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let (s, w) = d1_order4(i, n, h);
            apply(s, &w, f)
        })
        .collect()
}

/// Second derivative of a uniform sample vector (4th order).
pub fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let (s, w) = d2_order4(i, n, h);
            apply(s, &w, f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_poly(deg: i32, order_exact: bool) {
        let n = 9;
        let h = 0.3;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(deg)).collect();
        for i in 0..n {
            let x = i as f64 * h;
            let (s, w) = d1_order4(i, n, h);
            let d = apply(s, &w, &f);
            let exact = deg as f64 * x.powi(deg - 1);
            if order_exact {
                assert!((d - exact).abs() < 1e-9, "i={i} d={d} exact={exact}");
            }
        }
    }

    #[test]
    fn order4_exact_on_quartics() {
        for deg in 1..=4 {
            check_poly(deg, true);
        }
    }

    #[test]
    fn second_derivative_exact_on_low_degree() {
        let n = 10;
        let h = 0.2;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(5)).collect();
        let d = second_derivative(&f, h);
        for (i, v) in d.iter().enumerate() {
            let x = i as f64 * h;
            assert!((v - 20.0 * x.powi(3)).abs() < 1e-8);
        }
        for i in 0..n {
            let (s, w) = d2_order2(i, n, h);
            let g: Vec<f64> = (0..n).map(|k| (k as f64 * h).powi(2)).collect();
            assert!((apply(s, &w, &g) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_stencil_sees_checkerboard() {
        let n = 12;
        let f: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for i in 1..n - 2 {
            let (s, w) = d1_forward2(i, n, 0.1);
            let (s2, w2) = d1_order2(i, n, 0.1);
            assert!(apply(s, &w, &f).abs() > 1.0);
            assert!(apply(s2, &w2, &f).abs() < 1e-12);
        }
    }
}
