//! Detection-rate approximation.
//!
//! `X = |beta1 + v1|^2 + |rho_tail + z2|^2` with `v1, z2 ~ CN(0, 1/rho)` has
//! density
//!
//! ```text
//! f(x) = (rho / |beta|) sqrt(x) e^{-rho (x + |beta|^2)} I_1(2 rho |beta| sqrt(x)),
//! ```
//!
//! which is the Poisson(`rho |beta|^2`) mixture of `Gamma(k + 2, 1/rho)`.
//! The detection rate is therefore a Poisson-weighted sum of surrogate CDFs
//! with `sx = k + 2`, `sy = L - 2` and rate `rho`.

use num_complex::Complex64;

use super::roots::fixed_points;
use super::special::{bessel_i1e, ln_factorial, p_lower};
use super::surrogate::surrogate_cdf;
use super::SdrModel;
use crate::array::{inner, link_constants, steering_unit, unitary_completion, ArrayGeometry, TerminalProfile};
use crate::detector::GcsKnowledge;
use crate::error::Result;

/// Hard cap on the number of mixture terms.
pub const MAX_SERIES_TERMS: usize = 500;
const REL_TAIL: f64 = 1e-12;

/// Build the detection surrogate for an attacker at `ma` with phase `psi`.
pub fn build_sdr_model(
    gcs: &GcsKnowledge,
    ma: &TerminalProfile,
    psi: f64,
    geom: &ArrayGeometry,
) -> Result<SdrModel> {
    let ma_consts = link_constants(ma, gcs.sigma_sq)?;
    let a1 = steering_unit(geom, ma.direction());
    let eps0 = gcs.consts.eps_sq.sqrt();
    let rot = Complex64::from_polar(ma_consts.los_amp, psi);
    let delta: Vec<Complex64> = a1
        .iter()
        .zip(&gcs.a0_bar)
        .map(|(a1, a0)| (a1 * rot - a0 * gcs.consts.los_amp) / eps0)
        .collect();
    let u1 = unitary_completion(&a1)?;
    let beta = u1.adjoint_mul(&delta);
    let tail = beta[1..].iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let rho = gcs.consts.eps_sq * geom.len() as f64 / ma_consts.eps_sq;
    debug_assert!((beta[0] - inner(&a1, &delta)).norm() < 1e-9);
    SdrModel::new(geom.len() as u32, rho, beta[0], tail)
}

/// Poisson weights `w_k = e^{-m} m^k / k!` over the range carrying all but
/// a negligible part of the mass, starting at the returned index.
fn poisson_start(m: f64) -> usize {
    if m <= 0.0 {
        return 0;
    }
    (m - 10.0 * m.sqrt() - 10.0).floor().max(0.0) as usize
}

fn ln_poisson(m: f64, k: usize) -> f64 {
    if m == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -m + k as f64 * m.ln() - ln_factorial(k as u32)
}

pub fn noncentral_pdf(x: f64, model: &SdrModel) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let rho = model.rho_factor();
    let b_sq = model.beta_norm_sq();
    if b_sq == 0.0 {
        return rho * rho * x * (-rho * x).exp();
    }
    let b = b_sq.sqrt();
    let s = x.sqrt();
    // e^{-rho (x + b^2)} I_1(2 rho b s) = e^{-rho (s - b)^2} i1e(2 rho b s)
    (rho / b) * s * bessel_i1e(2.0 * rho * b * s) * (-rho * (s - b) * (s - b)).exp()
}

/// `P{X <= x}` from the Poisson mixture.
pub fn noncentral_cdf(x: f64, model: &SdrModel) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let m = model.noncentrality();
    let rx = model.rho_factor() * x;
    let mut sum = 0.0;
    let mut k = poisson_start(m);
    loop {
        let w = ln_poisson(m, k).exp();
        let term = w * p_lower(k as u32 + 2, rx);
        sum += term;
        k += 1;
        if (k as f64 > m && (term < REL_TAIL * sum || w < 1e-18)) || k > poisson_start(m) + 100_000 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Value and series diagnostics of the approximate detection rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrCcdf {
    pub value: f64,
    /// Number of mixture terms summed.
    pub terms: usize,
    /// False when the term cap was reached before the tail criterion.
    pub converged: bool,
    /// Terms evaluated by quadrature instead of the closed form.
    pub quadrature_terms: usize,
}

/// `P{X + Y - ln Y > tau}` for the detection surrogate.
pub fn sdr_ccdf(tau: f64, model: &SdrModel) -> SdrCcdf {
    if tau.is_nan() || tau <= 1.0 {
        return SdrCcdf {
            value: 1.0,
            terms: 0,
            converged: true,
            quadrature_terms: 0,
        };
    }
    if tau.is_infinite() {
        return SdrCcdf {
            value: 0.0,
            terms: 0,
            converged: true,
            quadrature_terms: 0,
        };
    }
    let roots = fixed_points(tau).expect("tau > 1 has roots");
    let m = model.noncentrality();
    let rho = model.rho_factor();
    let sy = model.l_ant() - 2;
    let start = poisson_start(m);
    let mut sum = 0.0;
    let mut terms = 0;
    let mut quadrature_terms = 0;
    let mut converged = false;
    let mut k = start;
    while terms < MAX_SERIES_TERMS {
        let w = ln_poisson(m, k).exp();
        let c = surrogate_cdf(k as u32 + 2, sy, rho, tau, &roots);
        if !c.closed_form {
            quadrature_terms += 1;
        }
        let term = w * c.value;
        sum += term;
        terms += 1;
        k += 1;
        if k as f64 > m && (term < REL_TAIL * sum || w < 1e-18) {
            converged = true;
            break;
        }
    }
    SdrCcdf {
        value: (1.0 - sum).clamp(0.0, 1.0),
        terms,
        converged,
        quadrature_terms,
    }
}
