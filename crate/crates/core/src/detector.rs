//! The GLLR test statistic and the threshold decision.
//!
//! With the attacker's parameters replaced by their ML estimates the test
//! reduces to
//!
//! ```text
//! T = |y_bar - alpha_0 a_bar_0|^2 / eps_0^2 - ln[(|y_bar|^2 - max |y_bar^H a_bar|^2) / eps_0^2]
//! ```
//!
//! and the packet is attributed to an attacker when `T > tau`.

use num_complex::Complex64;

use crate::array::{link_constants, norm_sq, steering_unit, ArrayGeometry, LinkConstants, TerminalProfile};
use crate::error::{domain, Result};
use crate::estimator::{estimate_from_peak, DirectionGrid, EstimateSet};
use crate::signal::{Hypothesis, NoiseParams, ReceivedVector};

/// Relative floor (in units of `sigma^2`) applied to the residual energy
/// inside the logarithm.
pub const RESIDUAL_FLOOR: f64 = 1e-6;

/// What the UAV knows about the legitimate transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct GcsKnowledge {
    pub profile: TerminalProfile,
    pub consts: LinkConstants,
    /// `a(omega_0, mu_0) / sqrt(L)`.
    pub a0_bar: Vec<Complex64>,
    pub sigma_sq: f64,
}

impl GcsKnowledge {
    pub fn new(profile: TerminalProfile, geom: &ArrayGeometry, noise: &NoiseParams) -> Result<Self> {
        Ok(Self {
            consts: link_constants(&profile, noise.sigma_sq())?,
            a0_bar: steering_unit(geom, profile.direction()),
            profile,
            sigma_sq: noise.sigma_sq(),
        })
    }
}

/// Breakdown of one evaluation of the statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrValue {
    pub statistic: f64,
    /// `|y_bar - alpha_0 a_bar_0|^2 / eps_0^2`.
    pub fit_term: f64,
    /// `|y_bar|^2 - peak` before flooring.
    pub residual_energy: f64,
    /// True when the residual energy was replaced by the floor.
    pub floored: bool,
}

/// Evaluate `T` given the grid peak.
pub fn glr_from_peak(y_bar: &ReceivedVector, know: &GcsKnowledge, peak: f64) -> Result<GlrValue> {
    if y_bar.len() != know.a0_bar.len() {
        return Err(crate::Error::Dimension {
            expected: know.a0_bar.len(),
            got: y_bar.len(),
        });
    }
    let eps_sq = know.consts.eps_sq;
    if !(eps_sq > 0.0) {
        return Err(domain("eps_0^2 must be positive"));
    }
    let alpha = know.consts.los_amp;
    let fit: f64 = y_bar
        .y_bar
        .iter()
        .zip(&know.a0_bar)
        .map(|(y, a)| (y - a * alpha).norm_sqr())
        .sum();
    let residual_energy = y_bar.energy() - peak;
    let floor = know.sigma_sq * RESIDUAL_FLOOR;
    let floored = residual_energy <= floor;
    let resid = if floored { floor } else { residual_energy };
    let fit_term = fit / eps_sq;
    Ok(GlrValue {
        statistic: fit_term - (resid / eps_sq).ln(),
        fit_term,
        residual_energy,
        floored,
    })
}

pub fn glr_statistic_detailed(
    y_bar: &ReceivedVector,
    know: &GcsKnowledge,
    grid: &DirectionGrid,
) -> Result<GlrValue> {
    let peak = grid.search(&y_bar.y_bar)?;
    glr_from_peak(y_bar, know, peak.peak)
}

pub fn glr_statistic(y_bar: &ReceivedVector, know: &GcsKnowledge, grid: &DirectionGrid) -> Result<f64> {
    Ok(glr_statistic_detailed(y_bar, know, grid)?.statistic)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Hypothesis,
}

/// `H1` iff `statistic > threshold`; a tie goes to `H0`.
pub fn decide(statistic: f64, threshold: f64) -> Verdict {
    let decision = if statistic > threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Verdict {
        statistic,
        threshold,
        decision,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Authentication {
    pub verdict: Verdict,
    pub estimates: EstimateSet,
    pub floored: bool,
}

/// Estimate, evaluate and decide for one packet.
pub fn authenticate(
    y_bar: &ReceivedVector,
    know: &GcsKnowledge,
    grid: &DirectionGrid,
    threshold: f64,
) -> Result<Authentication> {
    let peak = grid.search(&y_bar.y_bar)?;
    let estimates = estimate_from_peak(y_bar, &peak);
    let value = glr_from_peak(y_bar, know, peak.peak)?;
    Ok(Authentication {
        verdict: decide(value.statistic, threshold),
        estimates,
        floored: value.floored,
    })
}

/// The statistic's guaranteed lower bound when `(omega_0, mu_0)` lies on the
/// search grid: the peak is at least the correlation with `a_bar_0`.
pub fn gcs_lower_bound(y_bar: &ReceivedVector, know: &GcsKnowledge) -> f64 {
    let c: Complex64 = y_bar
        .y_bar
        .iter()
        .zip(&know.a0_bar)
        .map(|(y, a)| y.conj() * a)
        .sum();
    let fit: f64 = y_bar
        .y_bar
        .iter()
        .zip(&know.a0_bar)
        .map(|(y, a)| (y - a * know.consts.los_amp).norm_sqr())
        .sum();
    let eps_sq = know.consts.eps_sq;
    fit / eps_sq - ((norm_sq(&y_bar.y_bar) - c.norm_sqr()) / eps_sq).ln()
}
