//! Bracketed bisection for monotone scalar curves.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Finds x in [lo, hi] with f(x) = target for monotone f, stopping when
/// |f(x) − target| ≤ tol or the bracket stops shrinking.
pub fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let flo = f(lo) - target;
    let fhi = f(hi) - target;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoConvergence(format!(
            "target {target} not bracketed by [{lo}, {hi}] (values {flo}, {fhi})"
        )));
    }
    let increasing = fhi > 0.0;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = f(mid) - target;
        if v.abs() <= tol && hi - lo <= 1e-13 * hi.abs() {
            return Ok(mid);
        }
        if (v > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Doubles `start` until `pred` holds, giving up past 1e300.
pub fn expand_upward<P: Fn(f64) -> bool>(start: f64, pred: P) -> Result<f64> {
    let mut x = start.max(f64::MIN_POSITIVE);
    while !pred(x) {
        x *= 2.0;
        if x > 1e300 {
            return Err(Error::NoConvergence("could not bracket the root".into()));
        }
    }
    Ok(x)
}

/// Golden-section maximizer of a unimodal function on [lo, hi].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..400 {
        if hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}
