//! The incomplete-gamma segment `gamma(n, a; b, c) = int_b^c x^n e^{-a x} dx`.
//!
//! Expanding `x = b + t` gives
//!
//! ```text
//! gamma(n, a; b, c) = e^{-a b} sum_{m=0}^{n} C(n, m) b^{n-m} J_m(a, c - b),
//! J_m(a, h) = int_0^h t^m e^{-a t} dt,
//! ```
//!
//! a sum of positive terms for any sign of `a` (with `0 <= b`), so it is
//! evaluated in log space without cancellation. `J_m` is `m!/a^{m+1} P(m+1, a h)`
//! for `a > 0`, `h^{m+1}/(m+1)` for `a = 0`, and a positive power series for
//! `a < 0`.
//!
//! [`gamma_segment_expansion`] is the textbook finite sum
//! `sum_j n!/((n-j)! a^{j+1}) (b^{n-j} e^{-ab} - c^{n-j} e^{-ac})`, which is
//! exact in exact arithmetic but cancels badly when `|a| c` is small.

use super::special::{ln_binomial, ln_factorial, ln_p_lower, LogSum};
use crate::error::{domain, Result};

fn check(b: f64, c: f64, a: f64) -> Result<()> {
    if !(b >= 0.0) || !(c >= b) || !a.is_finite() || !c.is_finite() {
        return Err(domain(format!(
            "gamma segment needs 0 <= b <= c and finite a, got a = {a}, b = {b}, c = {c}"
        )));
    }
    Ok(())
}

/// `ln J_m(a, h)` for `h > 0`.
fn ln_j(m: u32, a: f64, h: f64) -> f64 {
    let mf = m as f64;
    if a == 0.0 {
        (mf + 1.0) * h.ln() - (mf + 1.0).ln()
    } else if a > 0.0 {
        ln_factorial(m) - (mf + 1.0) * a.ln() + ln_p_lower(m + 1, a * h)
    } else {
        // sum_i |a|^i h^{m+i+1} / (i! (m+i+1))
        let x = -a * h;
        let mut ln_t = (mf + 1.0) * h.ln() - (mf + 1.0).ln();
        let mut acc = LogSum::default();
        acc.add(ln_t);
        let lx = x.ln();
        let mut i = 0.0;
        loop {
            // t_{i+1} / t_i = x (m+i+1) / ((i+1)(m+i+2))
            ln_t += lx + (mf + i + 1.0).ln() - (i + 1.0).ln() - (mf + i + 2.0).ln();
            acc.add(ln_t);
            i += 1.0;
            if i > x && ln_t < acc.ln() - 40.0 {
                break;
            }
        }
        acc.ln()
    }
}

/// `ln gamma(n, a; b, c)`; `-inf` when `b == c`.
pub fn ln_gamma_segment(n: u32, a: f64, b: f64, c: f64) -> Result<f64> {
    check(b, c, a)?;
    if b == c {
        return Ok(f64::NEG_INFINITY);
    }
    let h = c - b;
    let mut acc = LogSum::default();
    if b == 0.0 {
        acc.add(ln_j(n, a, h));
    } else {
        let lb = b.ln();
        for m in 0..=n {
            acc.add(ln_binomial(n, m) + (n - m) as f64 * lb + ln_j(m, a, h));
        }
    }
    Ok(-a * b + acc.ln())
}

pub fn gamma_segment(n: u32, a: f64, b: f64, c: f64) -> Result<f64> {
    Ok(ln_gamma_segment(n, a, b, c)?.exp())
}

/// The closed-form finite sum, evaluated term by term. Accurate only when
/// `|a| c` is not small compared with `n`; kept as an independent route for
/// cross-checking.
pub fn gamma_segment_expansion(n: u32, a: f64, b: f64, c: f64) -> Result<f64> {
    check(b, c, a)?;
    if a == 0.0 {
        let p = n as f64 + 1.0;
        return Ok((c.powf(p) - b.powf(p)) / p);
    }
    let (eb, ec) = ((-a * b).exp(), (-a * c).exp());
    let mut sum = 0.0;
    for j in 0..=n {
        let coef = (ln_factorial(n) - ln_factorial(n - j)).exp() / a.powi(j as i32 + 1);
        let k = (n - j) as i32;
        sum += coef * (b.powi(k) * eb - c.powi(k) * ec);
    }
    Ok(sum)
}
