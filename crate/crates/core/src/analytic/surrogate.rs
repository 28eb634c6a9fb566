//! `P{X + Y - ln Y < tau}` for independent `X ~ Gamma(sx, 1/r)` and
//! `Y ~ Gamma(sy, 1/r)` with integer shapes and a common rate `r`.
//!
//! With `u = x + y`, `v = y` the region becomes `u in [q_lo, q_hi]`,
//! `v in [e^{u - tau}, u]`, and a binomial expansion of `(u - v)^{sx-1}`
//! yields
//!
//! ```text
//! r^S / (G(sx) G(sy)) sum_{j<sx} C(sx-1, j) (-1)^{sx-1-j}
//!     [gamma(S-1, r) - e^{-(S-1-j) tau} gamma(j, r-(S-1-j))] / (S-1-j),   S = sx + sy,
//! ```
//!
//! with every `gamma(n, a)` taken over `[q_lo, q_hi]`. The alternating sum
//! loses roughly `log10(sum |terms| / |result|)` digits, so whenever that
//! exceeds [`MAX_CANCELLATION`] the same probability is computed from the
//! one-dimensional form `int f_Y(v) P(sx, r (tau - v + ln v)) dv` instead.

use super::gamma_segment::ln_gamma_segment;
use super::quad::integrate;
use super::roots::RootPair;
use super::special::{ln_binomial, ln_gamma, ln_p_lower};

/// Largest tolerated `sum |terms| / |sum|` in the closed form.
pub const MAX_CANCELLATION: f64 = 1e4;

/// Shapes above this skip the closed form outright (its cancellation grows
/// like `2^{sx}`).
pub const MAX_CLOSED_FORM_SHAPE: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCdf {
    pub value: f64,
    /// False when the quadrature form was used.
    pub closed_form: bool,
}

pub fn surrogate_cdf(sx: u32, sy: u32, rate: f64, tau: f64, roots: &RootPair) -> SurrogateCdf {
    if roots.q_hi <= roots.q_lo {
        return SurrogateCdf {
            value: 0.0,
            closed_form: true,
        };
    }
    if sx <= MAX_CLOSED_FORM_SHAPE {
        if let Some(v) = closed_form(sx, sy, rate, tau, roots) {
            return SurrogateCdf {
                value: v,
                closed_form: true,
            };
        }
    }
    SurrogateCdf {
        value: by_quadrature(sx, sy, rate, tau, roots),
        closed_form: false,
    }
}

/// The binomial/gamma-segment closed form; `None` when it is too badly
/// conditioned to trust.
pub fn closed_form(sx: u32, sy: u32, rate: f64, tau: f64, roots: &RootPair) -> Option<f64> {
    assert!(sx >= 1 && sy >= 1);
    let total = sx + sy;
    let (lo, hi) = (roots.q_lo, roots.q_hi);
    let ln_pref = total as f64 * rate.ln() - ln_gamma(sx as f64) - ln_gamma(sy as f64);
    let ln_first = ln_gamma_segment(total - 1, rate, lo, hi).ok()?;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for j in 0..sx {
        let e = (total - 1 - j) as f64;
        let ln_c = ln_pref + ln_binomial(sx - 1, j) - e.ln();
        let ln_a = ln_c + ln_first;
        let ln_b = ln_c - e * tau + ln_gamma_segment(j, rate - e, lo, hi).ok()?;
        // e^A - e^B = e^A (1 - e^{B - A})
        let term = if ln_a == f64::NEG_INFINITY {
            0.0
        } else {
            -ln_a.exp() * (ln_b - ln_a).exp_m1()
        };
        let signed = if (sx - 1 - j) % 2 == 0 { term } else { -term };
        sum += signed;
        abs_sum += term.abs();
    }
    if abs_sum == 0.0 {
        return Some(0.0);
    }
    if !(sum > 0.0) || abs_sum / sum > MAX_CANCELLATION {
        return None;
    }
    Some(sum.min(1.0))
}

/// `int_{q_lo}^{q_hi} f_Y(v) P(sx, r (tau - v + ln v)) dv`.
pub fn by_quadrature(sx: u32, sy: u32, rate: f64, tau: f64, roots: &RootPair) -> f64 {
    let ln_norm = sy as f64 * rate.ln() - ln_gamma(sy as f64);
    let syf = sy as f64;
    let f = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let slack = tau - v + v.ln();
        if slack <= 0.0 {
            return 0.0;
        }
        let ln_pdf = ln_norm + (syf - 1.0) * v.ln() - rate * v;
        (ln_pdf + ln_p_lower(sx, rate * slack)).exp()
    };
    integrate(f, roots.q_lo, roots.q_hi, 1e-15, 1e-12).clamp(0.0, 1.0)
}
