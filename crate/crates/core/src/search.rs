//! Small one-dimensional search primitives shared across modules.

use crate::scalar::Scalar;

/// Golden-section maximisation of a unimodal `f` on `[a, b]`, stopping once
/// the bracket is narrower than `width`. Returns `(argmax, max)`.
pub(crate) fn golden_max<T: Scalar, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, width: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..500 {
        if (b - a).abs() <= width {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]` where `f(lo)` and
/// `f(hi)` have opposite signs (or one is zero). Stops when `done(t, f(t))`
/// holds or the bracket can no longer shrink. Returns the final bracket
/// midpoint together with its value and the bracket.
pub(crate) fn bisect<T: Scalar, F, D>(f: F, mut lo: T, mut hi: T, done: D, max_iter: usize) -> Bisection<T>
where
    F: Fn(T) -> T,
    D: Fn(T, T) -> bool,
{
    let mut f_lo = f(lo);
    if f_lo == T::zero() {
        return Bisection { t: lo, value: f_lo, lo, hi: lo };
    }
    let f_hi = f(hi);
    if f_hi == T::zero() {
        return Bisection { t: hi, value: f_hi, lo: hi, hi };
    }
    let mut mid = lo;
    let mut f_mid = f_lo;
    for _ in 0..max_iter {
        mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            // bracket exhausted at floating point resolution
            return Bisection { t: mid, value: f(mid), lo, hi };
        }
        f_mid = f(mid);
        if done(mid, f_mid) {
            return Bisection { t: mid, value: f_mid, lo, hi };
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Bisection { t: mid, value: f_mid, lo, hi }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Bisection<T> {
    pub t: T,
    pub value: T,
    pub lo: T,
    pub hi: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x: f64| -(x - 1.25).powi(2) + 3.0, -4.0, 7.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let b = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, |_, v| v.abs() < 1e-14, 200);
        assert!(b.value.abs() < 1e-14);
        assert!((b.t - 2f64.sqrt()).abs() < 1e-14);
    }
}
