//! Array geometry, steering vectors and the Rician ground-to-air channel.
//!
//! The UAV carries a T-shaped array with half-wavelength spacing: `2M+1`
//! elements along the x-axis (indices `M..=-M`) and `N` along the y-axis
//! (indices `1..=N`). A direction is parameterized by its direction cosines
//! `(omega, mu)`, and the array response is
//!
//! ```text
//! a(omega, mu) = [ e^{j pi k omega} for k = M..-M ;  e^{-j pi k mu} for k = 1..N ]
//! ```
//!
//! so every entry has unit modulus and `|a|^2 = L = 2M+1+N`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    m_half: usize,
    n_y: usize,
}

impl ArrayGeometry {
    pub fn new(m_half: usize, n_y: usize) -> Result<Self> {
        if 2 * m_half + 1 + n_y < 2 {
            return Err(domain("array must have at least two elements"));
        }
        Ok(Self { m_half, n_y })
    }

    /// The 25-element array used throughout the numerical study (M=6, N=12).
    pub fn t_shaped_25() -> Self {
        Self { m_half: 6, n_y: 12 }
    }

    pub fn m_half(&self) -> usize {
        self.m_half
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    /// Number of x-axis elements, `2M+1`.
    pub fn n_x(&self) -> usize {
        2 * self.m_half + 1
    }

    /// Total element count `L`.
    pub fn len(&self) -> usize {
        self.n_x() + self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Phase multipliers of the x-axis elements: `M, M-1, ..., -M`.
    pub(crate) fn x_indices(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.m_half as i64;
        (0..self.n_x() as i64).map(move |i| (m - i) as f64)
    }
}

/// Direction cosines `(omega, mu)`, both in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DirectionCosines {
    omega: f64,
    mu: f64,
}

impl DirectionCosines {
    pub fn new(omega: f64, mu: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && (-1.0..=1.0).contains(&v);
        if !ok(omega) || !ok(mu) {
            return Err(domain(format!(
                "direction cosines ({omega}, {mu}) outside [-1, 1]^2"
            )));
        }
        Ok(Self { omega, mu })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Arrival angles `(theta, phi)` in radians. Only ever used through
/// [`angles_to_cosines`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub theta: f64,
    pub phi: f64,
}

impl AnglePair {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(domain("angles must be finite"));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }
}

/// `omega = sin(theta) cos(phi)`, `mu = sin(theta) sin(phi)`.
pub fn angles_to_cosines(angles: AnglePair) -> DirectionCosines {
    let (st, (sp, cp)) = (angles.theta.sin(), angles.phi.sin_cos());
    // |sin| and |cos| never exceed one in IEEE arithmetic, so neither does
    // their product.
    DirectionCosines {
        omega: st * cp,
        mu: st * sp,
    }
}

/// Ground distance helper for scenario construction: a UAV hovering at
/// `height` sees a ground terminal at zenith angle `theta` from
/// `height / cos(theta)` away.
pub fn distance_from_height(height: f64, theta: f64) -> Result<f64> {
    let c = theta.cos();
    if !(height > 0.0) || !(c > 0.0) {
        return Err(domain(format!(
            "cannot place a ground terminal at height {height} and theta {theta}"
        )));
    }
    Ok(height / c)
}

/// Physical parameters of one transmitter as seen from the UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalProfile {
    power_mw: f64,
    distance_m: f64,
    lambda_sq: f64,
    direction: DirectionCosines,
    path_loss_exp: f64,
}

impl TerminalProfile {
    pub fn new(
        power_mw: f64,
        distance_m: f64,
        lambda_sq: f64,
        direction: DirectionCosines,
        path_loss_exp: f64,
    ) -> Result<Self> {
        if !(power_mw > 0.0 && power_mw.is_finite()) {
            return Err(domain(format!("power must be positive, got {power_mw}")));
        }
        if !(distance_m > 0.0 && distance_m.is_finite()) {
            return Err(domain(format!(
                "distance must be positive, got {distance_m}"
            )));
        }
        if !(0.0..=1.0).contains(&lambda_sq) {
            return Err(domain(format!("lambda^2 must lie in [0, 1], got {lambda_sq}")));
        }
        if !(path_loss_exp > 0.0 && path_loss_exp.is_finite()) {
            return Err(domain(format!(
                "path-loss exponent must be positive, got {path_loss_exp}"
            )));
        }
        Ok(Self {
            power_mw,
            distance_m,
            lambda_sq,
            direction,
            path_loss_exp,
        })
    }

    pub fn power_mw(&self) -> f64 {
        self.power_mw
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn lambda_sq(&self) -> f64 {
        self.lambda_sq
    }

    pub fn direction(&self) -> DirectionCosines {
        self.direction
    }

    pub fn path_loss_exp(&self) -> f64 {
        self.path_loss_exp
    }

    /// Scattered-power fraction `delta^2 = 1 - lambda^2`.
    pub fn delta_sq(&self) -> f64 {
        1.0 - self.lambda_sq
    }

    /// Rician factor `kappa = 1/lambda^2 - 1` (infinite for a pure-scatter link).
    pub fn kappa(&self) -> f64 {
        1.0 / self.lambda_sq - 1.0
    }

    /// Large-scale amplitude gain `d^{-alpha/2}`.
    pub fn amplitude_gain(&self) -> f64 {
        self.distance_m.powf(-self.path_loss_exp / 2.0)
    }

    pub fn with_power(self, power_mw: f64) -> Result<Self> {
        Self::new(
            power_mw,
            self.distance_m,
            self.lambda_sq,
            self.direction,
            self.path_loss_exp,
        )
    }

    pub fn with_lambda_sq(self, lambda_sq: f64) -> Result<Self> {
        Self::new(
            self.power_mw,
            self.distance_m,
            lambda_sq,
            self.direction,
            self.path_loss_exp,
        )
    }
}

/// Per-link constants entering the test statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConstants {
    /// LOS amplitude `sqrt(P) d^{-alpha/2} lambda`.
    pub los_amp: f64,
    /// Per-element scatter-plus-noise power `P d^{-alpha} delta^2 + sigma^2`.
    pub eps_sq: f64,
    /// Total amplitude `sqrt(P) d^{-alpha/2}`.
    pub x_amp: f64,
}

pub fn link_constants(profile: &TerminalProfile, sigma_sq: f64) -> Result<LinkConstants> {
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(domain(format!("sigma^2 must be positive, got {sigma_sq}")));
    }
    let x_amp = profile.power_mw.sqrt() * profile.amplitude_gain();
    let x_sq = x_amp * x_amp;
    Ok(LinkConstants {
        los_amp: x_amp * profile.lambda_sq.sqrt(),
        eps_sq: x_sq * profile.delta_sq() + sigma_sq,
        x_amp,
    })
}

pub fn steering_vector(geom: &ArrayGeometry, dir: DirectionCosines) -> Vec<Complex64> {
    let mut a = Vec::with_capacity(geom.len());
    a.extend(
        geom.x_indices()
            .map(|k| Complex64::from_polar(1.0, PI * k * dir.omega)),
    );
    a.extend((1..=geom.n_y).map(|k| Complex64::from_polar(1.0, -PI * k as f64 * dir.mu)));
    a
}

/// Unit-norm steering vector `a / sqrt(L)`.
pub fn steering_unit(geom: &ArrayGeometry, dir: DirectionCosines) -> Vec<Complex64> {
    let scale = 1.0 / (geom.len() as f64).sqrt();
    steering_vector(geom, dir)
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

/// Draw from `CN(0, variance)`.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Channel `f = d^{-alpha/2} (lambda a + delta h)`.
    pub f: Vec<Complex64>,
    /// The non-LOS draw `h ~ CN(0, I_L)`.
    pub h: Vec<Complex64>,
}

pub fn synth_channel<R: Rng + ?Sized>(
    profile: &TerminalProfile,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> ChannelRealization {
    let h: Vec<Complex64> = (0..geom.len()).map(|_| complex_normal(rng, 1.0)).collect();
    let f = assemble_channel(profile, geom, &h);
    ChannelRealization { f, h }
}

pub(crate) fn assemble_channel(
    profile: &TerminalProfile,
    geom: &ArrayGeometry,
    h: &[Complex64],
) -> Vec<Complex64> {
    let gain = profile.amplitude_gain();
    let (lambda, delta) = (profile.lambda_sq.sqrt(), profile.delta_sq().sqrt());
    steering_vector(geom, profile.direction)
        .iter()
        .zip(h)
        .map(|(a, h)| (a * lambda + h * delta) * gain)
        .collect()
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    /// `Q^H v`.
    pub fn adjoint_mul(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix dimension");
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (r, vr) in v.iter().enumerate() {
            let row = &self.data[r * self.n..(r + 1) * self.n];
            for (o, q) in out.iter_mut().zip(row) {
                *o += q.conj() * vr;
            }
        }
        out
    }

    /// `Q v`.
    pub fn mul(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix dimension");
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(q, x)| q * x).sum())
            .collect()
    }
}

pub(crate) fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `u^H v`.
pub(crate) fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// A unitary matrix whose first column is the unit vector `u`.
///
/// Built from a single Householder reflector `H = I - 2 w w^H / (w^H w)`
/// with `w = e_1 - e^{-j theta} u` (`theta = arg u_1`), which maps `e_1` to
/// `e^{-j theta} u`; the result is `e^{j theta} H`.
pub fn unitary_completion(u: &[Complex64]) -> Result<SquareMatrix> {
    let n = u.len();
    if n == 0 {
        return Err(domain("cannot complete an empty vector"));
    }
    let nrm = norm_sq(u).sqrt();
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(domain(format!("input must have unit norm, got {nrm}")));
    }
    let u1 = u[0];
    let phase = if u1.norm() > 0.0 {
        u1 / u1.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut w: Vec<Complex64> = u.iter().map(|x| -(phase.conj() * x)).collect();
    w[0] += 1.0;
    let wn = norm_sq(&w);
    let mut q = SquareMatrix::identity(n);
    if wn > 0.0 {
        let scale = 2.0 / wn;
        for r in 0..n {
            for c in 0..n {
                q.data[r * n + c] -= w[r] * w[c].conj() * scale;
            }
        }
    }
    for z in q.data.iter_mut() {
        *z *= phase;
    }
    Ok(q)
}
