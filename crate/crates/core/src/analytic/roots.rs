//! Roots of `e^{x - tau} = x`, equivalently `x - ln x = tau`.
//!
//! `x - ln x` is convex with minimum 1 at `x = 1`, so for `tau > 1` there
//! is one root in `(0, 1)` and one in `(1, inf)`; they bound the region
//! `{u : e^{u - tau} < u}` over which the surrogate distributions are
//! integrated.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub q_lo: f64,
    pub q_hi: f64,
}

/// Safeguarded Newton on a monotone function with a sign change on `[lo, hi]`.
fn newton_bracketed(
    f: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> f64 {
    let increasing = f(hi).0 > f(lo).0;
    let mut x = start.clamp(lo, hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        if v == 0.0 {
            return x;
        }
        if (v > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - v / d;
        let next = if newton > lo && newton < hi && d != 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
    }
    x
}

pub fn fixed_points(tau: f64) -> Result<RootPair> {
    if !(tau >= 1.0) || !tau.is_finite() {
        return Err(Error::NoRoots(tau));
    }
    if tau == 1.0 {
        return Ok(RootPair { q_lo: 1.0, q_hi: 1.0 });
    }
    // Lower root in log coordinates: s - e^s + tau = 0 for s = ln q < 0.
    let s = newton_bracketed(
        |s| (s - s.exp() + tau, 1.0 - s.exp()),
        -tau - 1.0,
        0.0,
        -tau,
    );
    // Upper root: x - ln x - tau = 0 on [1, 2 tau] (x - ln x at 2 tau exceeds tau).
    let hi = newton_bracketed(
        |x| (x - x.ln() - tau, 1.0 - 1.0 / x),
        1.0,
        2.0 * tau,
        tau + tau.ln() + 1.0,
    );
    Ok(RootPair {
        q_lo: s.exp().min(1.0),
        q_hi: hi.max(1.0),
    })
}
