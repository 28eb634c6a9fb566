//! False-alarm approximation and Neyman–Pearson threshold.

use super::roots::fixed_points;
use super::surrogate::surrogate_cdf;
use super::FarModel;
use crate::error::{domain, Result};

/// `P{X_k + Y_k - ln Y_k < tau}`.
pub fn far_cdf(tau: f64, model: &FarModel) -> f64 {
    if tau.is_nan() || tau <= 1.0 {
        return 0.0;
    }
    if tau.is_infinite() {
        return 1.0;
    }
    let roots = fixed_points(tau).expect("tau > 1 has roots");
    let l = model.l_ant();
    let k = model.k_split();
    surrogate_cdf(k, l - k, l as f64, tau, &roots).value
}

/// The approximate false-alarm rate at `tau`.
pub fn far_ccdf(tau: f64, model: &FarModel) -> f64 {
    1.0 - far_cdf(tau, model)
}

/// The `tau` at which the approximate false-alarm rate equals `eta`.
pub fn far_threshold(eta: f64, model: &FarModel) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain(format!("target false-alarm rate must lie in (0, 1), got {eta}")));
    }
    let excess = |t: f64| far_ccdf(t, model) - eta;
    let mut lo = 1.0;
    let mut hi = 2.0;
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(domain(format!("no threshold found for eta = {eta}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e = excess(mid);
        if e.abs() <= 1e-10 {
            return Ok(mid);
        }
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
