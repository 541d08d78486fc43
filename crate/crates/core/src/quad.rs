//! Composite Gauss–Legendre quadrature and a bracketed Newton inverse.

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// ∫_a^b f with `panels` 8-point Gauss–Legendre panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let m = a + (p as f64 + 0.5) * h;
        let r = 0.5 * h;
        for k in 0..4 {
            s += GL8_W[k] * (f(m - r * GL8_X[k]) + f(m + r * GL8_X[k]));
        }
    }
    s * 0.5 * h
}

/// Solve g(x) = y for increasing g on [lo, hi] given g' > 0.
pub fn invert_monotone<G, D>(g: G, dg: D, y: f64, lo: f64, hi: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let r = g(x) - y;
        if r.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
        if r > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let d = dg(x);
        let nx = x - r / d;
        x = if d > 0.0 && nx > a && nx < b { nx } else { 0.5 * (a + b) };
        if (b - a) < 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(|x| x.exp(), 0.0, 2.0, 4);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-13);
        let p = integrate(|x| x.powi(15), -1.0, 1.5, 1);
        assert!((p - (1.5f64.powi(16) - 1.0) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn inverts_sine() {
        let x = invert_monotone(f64::sin, f64::cos, 0.5, 0.0, 1.5);
        assert!((x - std::f64::consts::FRAC_PI_6).abs() < 1e-14);
    }
}
