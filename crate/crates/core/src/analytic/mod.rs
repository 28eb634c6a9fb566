//! Analytic approximations of the false-alarm and detection rates.
//!
//! Under `H0` the statistic is approximated by `X_k + Y_k - ln Y_k` with
//! `X_k ~ Gamma(k, 1/L)` and `Y_k ~ Gamma(L - k, 1/L)`; under `H1` by
//! `X + Y - ln Y` with `X` a scaled non-central chi-square (four real
//! degrees of freedom, non-centrality set by `beta`) and
//! `Y ~ Gamma(L - 2, 1/rho)`. Both distributions are reduced to integrals
//! over `[q_lo, q_hi]`, the roots of `x - ln x = tau`.

mod far;
mod gamma_segment;
mod quad;
mod roots;
mod sdr;
mod special;
mod surrogate;

pub use far::{far_ccdf, far_cdf, far_threshold};
pub use gamma_segment::{gamma_segment, gamma_segment_expansion, ln_gamma_segment};
pub use quad::{integrate, integrate_with_error};
pub use roots::{fixed_points, RootPair};
pub use sdr::{build_sdr_model, noncentral_cdf, noncentral_pdf, sdr_ccdf, SdrCcdf, MAX_SERIES_TERMS};
pub use special::{bessel_i1e, ln_gamma, ln_p_lower, p_lower, q_upper};
pub use surrogate::{surrogate_cdf, SurrogateCdf};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::array::complex_normal;
use crate::error::{domain, Result};

/// Parameters of the false-alarm surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FarModel {
    l_ant: u32,
    k_split: u32,
}

impl FarModel {
    pub fn new(l_ant: u32, k_split: u32) -> Result<Self> {
        if l_ant < 3 || k_split < 2 || k_split > l_ant - 1 {
            return Err(domain(format!(
                "need 2 <= k <= L - 1, got L = {l_ant}, k = {k_split}"
            )));
        }
        Ok(Self { l_ant, k_split })
    }

    /// `k = 2`.
    pub fn with_default_split(l_ant: u32) -> Result<Self> {
        Self::new(l_ant, 2)
    }

    pub fn l_ant(&self) -> u32 {
        self.l_ant
    }

    pub fn k_split(&self) -> u32 {
        self.k_split
    }

    /// One draw of `X_k + Y_k - ln Y_k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let scale = 1.0 / self.l_ant as f64;
        let x = Gamma::new(self.k_split as f64, scale).unwrap().sample(rng);
        let y = Gamma::new((self.l_ant - self.k_split) as f64, scale).unwrap().sample(rng);
        x + y - y.ln()
    }
}

/// Parameters of the detection surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdrModel {
    l_ant: u32,
    rho_factor: f64,
    beta_norm_sq: f64,
    #[serde(serialize_with = "ser_complex")]
    beta1: Complex64,
    rho_tail: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl SdrModel {
    /// `beta_norm_sq` is derived as `|beta1|^2 + rho_tail^2`.
    pub fn new(l_ant: u32, rho_factor: f64, beta1: Complex64, rho_tail: f64) -> Result<Self> {
        if l_ant < 3 {
            return Err(domain(format!("need L >= 3, got {l_ant}")));
        }
        if !(rho_factor > 0.0) || !rho_factor.is_finite() {
            return Err(domain(format!("rho factor must be positive, got {rho_factor}")));
        }
        if !(rho_tail >= 0.0) || !beta1.re.is_finite() || !beta1.im.is_finite() {
            return Err(domain("beta must be finite with a nonnegative tail norm"));
        }
        Ok(Self {
            l_ant,
            rho_factor,
            beta_norm_sq: beta1.norm_sqr() + rho_tail * rho_tail,
            beta1,
            rho_tail,
        })
    }

    /// The `beta = 0` model: `X ~ Gamma(2, 1/rho)`.
    pub fn central(l_ant: u32, rho_factor: f64) -> Result<Self> {
        Self::new(l_ant, rho_factor, Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn l_ant(&self) -> u32 {
        self.l_ant
    }

    pub fn rho_factor(&self) -> f64 {
        self.rho_factor
    }

    pub fn beta_norm_sq(&self) -> f64 {
        self.beta_norm_sq
    }

    pub fn beta1(&self) -> Complex64 {
        self.beta1
    }

    pub fn rho_tail(&self) -> f64 {
        self.rho_tail
    }

    /// Poisson mean of the mixture representation, `rho |beta|^2`.
    pub fn noncentrality(&self) -> f64 {
        self.rho_factor * self.beta_norm_sq
    }

    /// One draw of `|beta1 + v1|^2 + |rho_tail + z2|^2`, `v1, z2 ~ CN(0, 1/rho)`.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let var = 1.0 / self.rho_factor;
        let v1 = complex_normal(rng, var);
        let z2 = complex_normal(rng, var);
        (self.beta1 + v1).norm_sqr() + (z2 + self.rho_tail).norm_sqr()
    }

    /// One draw of `X + Y - ln Y`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.sample_x(rng);
        let y = Gamma::new((self.l_ant - 2) as f64, 1.0 / self.rho_factor)
            .unwrap()
            .sample(rng);
        x + y - y.ln()
    }
}
