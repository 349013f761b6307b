//! One-dimensional convex minimization: bracket expansion, golden-section
//! search, and a derivative-sign bisection polish.
//!
//! Golden-section alone cannot resolve a smooth minimizer beyond roughly
//! `sqrt(ε)` of the bracket scale because objective values near the minimum
//! agree to machine precision. Right derivatives keep full relative accuracy
//! there, so the final step bisects on their sign.

use crate::error::{GeomError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Min1d {
    pub t: f64,
    pub value: f64,
    /// The objective is flat (zero slope) over an interval of length
    /// `1e-6·scale` next to the reported minimizer.
    pub flat: bool,
}

/// Minimizes a convex (or unimodal) `f` over `[lo, hi]`, either bound may be
/// infinite. `df(t)` must be the right derivative of `f` at `t`.
pub(crate) fn minimize_1d<F, D>(f: F, df: D, lo: f64, hi: f64, t0: f64, scale: f64) -> Result<Min1d>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let t0 = t0.clamp(lo, hi);
    if lo == hi {
        return Ok(Min1d { t: lo, value: f(lo), flat: false });
    }

    let step0 = if lo.is_finite() && hi.is_finite() {
        ((hi - lo) / 8.0).min(scale)
    } else {
        scale
    };
    let right = expand(&f, t0, step0, hi, 1.0)?;
    let left = expand(&f, t0, step0, lo, -1.0)?;

    let (mut a, mut b) = (left, right);
    let tol = 1e-12 * scale;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let t_golden = 0.5 * (a + b);
    let f_golden = f(t_golden);

    let t_polish = polish(&df, t_golden, lo, hi, scale);
    let f_polish = f(t_polish);
    let (t, value) = if f_polish <= f_golden + 4.0 * f64::EPSILON * (1.0 + f_golden.abs()) {
        (t_polish, f_polish)
    } else {
        (t_golden, f_golden)
    };

    let delta = 1e-6 * scale;
    let slope_tol = 1e-12 * (1.0 + value.abs()) / scale;
    let flat_right = t + delta <= hi && df(t + delta) <= slope_tol;
    let flat_left = t - delta >= lo && df(t - delta) >= -slope_tol;
    Ok(Min1d { t, value, flat: flat_right || flat_left })
}

/// Walks from `t0` in direction `sign` doubling the step while `f` strictly
/// decreases; returns the first point where it does not (or the bound).
fn expand<F: Fn(f64) -> f64>(f: &F, t0: f64, step0: f64, bound: f64, sign: f64) -> Result<f64> {
    if t0 == bound {
        return Ok(t0);
    }
    let mut prev = f(t0);
    let mut step = step0;
    for _ in 0..MAX_DOUBLINGS {
        let next = t0 + sign * step;
        let next = if sign > 0.0 { next.min(bound) } else { next.max(bound) };
        let fnext = f(next);
        if next == bound || !(fnext < prev) {
            return Ok(next);
        }
        prev = fnext;
        step *= 2.0;
    }
    Err(GeomError::ClipMiss(format!(
        "objective keeps decreasing after {MAX_DOUBLINGS} doublings"
    )))
}

/// Smallest `t` in `[lo, hi]` with `df(t) ≥ 0`, searched around `guess`.
fn polish<D: Fn(f64) -> f64>(df: &D, guess: f64, lo: f64, hi: f64, scale: f64) -> f64 {
    let mut step = 1e-9 * scale;
    let mut left = guess;
    while df(left) >= 0.0 {
        if left == lo {
            return lo;
        }
        left = (guess - step).max(lo);
        step *= 2.0;
        if !step.is_finite() {
            return guess;
        }
    }
    let mut step = 1e-9 * scale;
    let mut right = guess;
    while df(right) < 0.0 {
        if right == hi {
            return hi;
        }
        right = (guess + step).min(hi);
        step *= 2.0;
        if !step.is_finite() {
            return guess;
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (left + right);
        if mid <= left || mid >= right {
            break;
        }
        if df(mid) >= 0.0 {
            right = mid;
        } else {
            left = mid;
        }
    }
    right
}

/// Polynomial (Neville) extrapolation of samples `(x_i, y_i)` to `x = 0`.
pub(crate) fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimizer_to_machine_precision() {
        let m = minimize_1d(|t| (t - 0.3).powi(2) + 1.0, |t| 2.0 * (t - 0.3), -10.0, 10.0, 5.0, 1.0).unwrap();
        assert!((m.t - 0.3).abs() < 1e-15);
        assert!(!m.flat);
    }

    #[test]
    fn unbounded_bracket_expansion() {
        let m = minimize_1d(|t| (t - 1234.5).abs(), |t| if t >= 1234.5 { 1.0 } else { -1.0 }, f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0).unwrap();
        assert!((m.t - 1234.5).abs() < 1e-9);
    }

    #[test]
    fn boundary_minimum() {
        let m = minimize_1d(|t| t + 2.0, |_| 1.0, 0.0, f64::INFINITY, 3.0, 1.0).unwrap();
        assert_eq!(m.t, 0.0);
        assert!(!m.flat);
    }

    #[test]
    fn linear_decrease_without_bound_is_reported() {
        let r = minimize_1d(|t| -t, |_| -1.0, 0.0, f64::INFINITY, 0.0, 1.0);
        assert!(matches!(r, Err(GeomError::ClipMiss(_))));
    }

    #[test]
    fn plateau_is_flagged() {
        let f = |t: f64| (t.abs() - 1.0).max(0.0);
        let df = |t: f64| if t >= 1.0 { 1.0 } else if t < -1.0 { -1.0 } else { 0.0 };
        let m = minimize_1d(f, df, -5.0, 5.0, 3.0, 1.0).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(m.flat);
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| 0.7 + 2.0 * x - 3.0 * x * x + x * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 0.7).abs() < 1e-12);
    }
}
