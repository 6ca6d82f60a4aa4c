//! Brent's bracketing root finder (inverse quadratic interpolation with
//! bisection fallback).

/// Finds a root of `f` in `[a, b]` given `f(a)` and `f(b)` of opposite sign.
///
/// Stops once the bracket is narrower than `xtol` or an exact zero is hit, and
/// returns the bracket endpoint with the smaller |f|.
pub(crate) fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, xtol: f64) -> f64 {
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sine_root() {
        let f = |x: f64| libm::sin(x);
        let r = brent(f, 3.0, 3.3, f(3.0), f(3.3), 1e-14);
        assert!((r - core::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn exact_endpoint_zero() {
        let f = |x: f64| x - 1.0;
        assert_eq!(brent(f, 1.0, 2.0, 0.0, 1.0, 1e-12), 1.0);
    }

    #[test]
    fn cubic_with_flat_region() {
        let f = |x: f64| (x - 0.25) * (x - 0.25) * (x - 0.25);
        let r = brent(f, 0.0, 1.0, f(0.0), f(1.0), 1e-12);
        assert!((r - 0.25).abs() < 1e-9);
    }
}
