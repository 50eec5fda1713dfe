//! Quadrature on uniformly sampled data.

/// Composite Simpson rule over samples spaced `h` apart. An odd number of
/// intervals closes with the 3/8 rule on the last three.
pub fn simpson(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (ys[0] + ys[1]),
        3 => h / 3.0 * (ys[0] + 4.0 * ys[1] + ys[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                (k, 3.0 * h / 8.0 * (ys[k] + 3.0 * ys[k + 1] + 3.0 * ys[k + 2] + ys[k + 3]))
            };
            let mut acc = ys[0] + ys[even_end];
            for (i, y) in ys.iter().enumerate().take(even_end).skip(1) {
                acc += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
            }
            h / 3.0 * acc + tail
        }
    }
}

pub fn trapezoid(ys: &[f64], h: f64) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    let inner: f64 = ys[1..ys.len() - 1].iter().sum();
    h * (inner + 0.5 * (ys[0] + ys[ys.len() - 1]))
}

/// `out[j] = int_{x_j}^{x_end} y` by the cumulative trapezoid rule.
pub fn cumulative_from_right(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    let mut out = vec![0.0; n];
    for j in (0..n.saturating_sub(1)).rev() {
        out[j] = out[j + 1] + 0.5 * h * (ys[j] + ys[j + 1]);
    }
    out
}

/// Three-point Gauss–Legendre rule on `[a, b]`; exact for quintics.
pub fn gauss3<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: f64 = 0.774_596_669_241_483_4;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * (5.0 / 9.0 * f(mid - half * X) + 8.0 / 9.0 * f(mid) + 5.0 / 9.0 * f(mid + half * X))
}

/// Centered differences in the interior, second-order one-sided at the ends.
pub fn derivative(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    if n < 3 {
        return match n {
            2 => vec![(ys[1] - ys[0]) / h; 2],
            _ => vec![0.0; n],
        };
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * ys[0] + 4.0 * ys[1] - ys[2]) / (2.0 * h);
    d[n - 1] = (3.0 * ys[n - 1] - 4.0 * ys[n - 2] + ys[n - 3]) / (2.0 * h);
    for j in 1..n - 1 {
        d[j] = (ys[j + 1] - ys[j - 1]) / (2.0 * h);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        for n in [5usize, 6, 7, 10] {
            let h = 2.0 / (n - 1) as f64;
            let ys: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&ys, h) - 4.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn cumulative_matches_total() {
        let h = 0.01;
        let ys: Vec<f64> = (0..101).map(|i| (i as f64 * h).sin()).collect();
        let c = cumulative_from_right(&ys, h);
        assert!((c[0] - trapezoid(&ys, h)).abs() < 1e-14);
        assert_eq!(c[100], 0.0);
    }

    #[test]
    fn gauss_exact_on_quintic() {
        let v = gauss3(|x| x.powi(5) + x * x, 0.0, 1.0);
        assert!((v - (1.0 / 6.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let h = 0.1;
        let ys: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(2)).collect();
        for (i, d) in derivative(&ys, h).iter().enumerate() {
            assert!((d - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }
}
