//! Adaptive Simpson quadrature.

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Recursive Simpson with the usual `|S₂ − S₁|/15` error estimate and one
/// Richardson correction per accepted panel.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_trig() {
        assert!((adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12) - 4.0).abs() < 1e-12);
        assert!((adaptive_simpson(f64::sin, 0.0, PI, 1e-12) - 2.0).abs() < 1e-11);
        assert_eq!(adaptive_simpson(f64::exp, 1.0, 1.0, 1e-12), 0.0);
    }

    #[test]
    fn complete_elliptic_integral_matches_agm() {
        // K(m) = π / (2 AGM(1, √(1−m)))
        let k2: f64 = 0.975 * 0.975;
        let (mut a, mut g) = (1.0_f64, (1.0 - k2).sqrt());
        for _ in 0..30 {
            let an = 0.5 * (a + g);
            g = (a * g).sqrt();
            a = an;
        }
        let agm = PI / (2.0 * a);
        let quad = adaptive_simpson(|p| 1.0 / (1.0 - k2 * p.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 1e-13);
        assert!((agm - quad).abs() < 1e-11, "{agm} vs {quad}");
    }
}
