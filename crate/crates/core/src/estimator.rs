//! Maximum-likelihood estimation of the attacker's parameters.
//!
//! Under H1, `y_bar ~ CN(x lambda a_bar(omega, mu) e^{j psi}, (eps^2 / L) I)`
//! with `eps^2 = x^2 (1 - lambda^2) + sigma^2`. For a fixed direction the
//! likelihood is maximized in closed form (`z = lambda x = |y_bar^H a_bar|`,
//! `t = x^2 - z^2 = max(|y_bar|^2 - z^2 - sigma^2, 0)`), which leaves a 2-D
//! search for the direction maximizing `|y_bar^H a_bar(omega, mu)|^2`.
//!
//! The search runs over the symmetric grid `{k * step : |k * step| < 1}` in
//! each coordinate. The steering vector splits into an x-axis part that only
//! depends on `omega` and a y-axis part that only depends on `mu`, so the
//! correlation is `A(omega) + B(mu)` and the full grid costs one complex add
//! and a squared norm per point.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::array::{inner, norm_sq, steering_unit, ArrayGeometry, DirectionCosines};
use crate::error::{domain, Result};
use crate::signal::ReceivedVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    step: f64,
    refine: bool,
}

impl GridSpec {
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0 && step < 2.0) {
            return Err(domain(format!("grid step must lie in (0, 2), got {step}")));
        }
        Ok(Self {
            step,
            refine: false,
        })
    }

    /// Enable a single local pass at `step / 10` around the coarse peak.
    pub fn with_refinement(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn refine(&self) -> bool {
        self.refine
    }

    /// Ascending grid coordinates `k * step` with `|k * step| < 1`.
    pub fn points(&self) -> Vec<f64> {
        let mut k = (1.0 / self.step).ceil() as i64 - 1;
        while k > 0 && k as f64 * self.step >= 1.0 {
            k -= 1;
        }
        while ((k + 1) as f64) * self.step < 1.0 {
            k += 1;
        }
        (-k..=k).map(|i| i as f64 * self.step).collect()
    }
}

/// Result of a direction search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPeak {
    pub dir: DirectionCosines,
    /// `max |y_bar^H a_bar|^2`.
    pub peak: f64,
    /// `y_bar^H a_bar` at the maximizer.
    pub correlation: Complex64,
}

/// Steering tables for one geometry and grid, reusable across packets.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    geom: ArrayGeometry,
    spec: GridSpec,
    points: Vec<f64>,
    // points.len() x n_x and points.len() x n_y, already divided by sqrt(L)
    x_table: Vec<Complex64>,
    y_table: Vec<Complex64>,
}

impl DirectionGrid {
    pub fn new(geom: ArrayGeometry, spec: GridSpec) -> Self {
        let points = spec.points();
        let scale = 1.0 / (geom.len() as f64).sqrt();
        let mut x_table = Vec::with_capacity(points.len() * geom.n_x());
        let mut y_table = Vec::with_capacity(points.len() * geom.n_y());
        for &p in &points {
            x_table.extend(
                geom.x_indices()
                    .map(|k| Complex64::from_polar(scale, PI * k * p)),
            );
            y_table.extend((1..=geom.n_y()).map(|k| Complex64::from_polar(scale, -PI * k as f64 * p)));
        }
        Self {
            geom,
            spec,
            points,
            x_table,
            y_table,
        }
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Exhaustive search of `|y_bar^H a_bar|^2`; ties go to the smallest
    /// `omega`, then the smallest `mu`.
    pub fn search(&self, y_bar: &[Complex64]) -> Result<GridPeak> {
        if y_bar.len() != self.geom.len() {
            return Err(crate::Error::Dimension {
                expected: self.geom.len(),
                got: y_bar.len(),
            });
        }
        let (nx, ny) = (self.geom.n_x(), self.geom.n_y());
        let (yx, yy) = y_bar.split_at(nx);
        let n = self.points.len();

        let (ar, ai) = correlate(&self.x_table, yx, nx, n);
        let (br, bi) = correlate(&self.y_table, yy, ny, n);

        // Pass 1: per-row maxima (branch-free, vectorizable).
        let mut row_max = Vec::with_capacity(n);
        for i in 0..n {
            let (r0, i0) = (ar[i], ai[i]);
            let mut m = f64::NEG_INFINITY;
            for (r1, i1) in br.iter().zip(&bi) {
                let (re, im) = (r0 + r1, i0 + i1);
                let p = re * re + im * im;
                m = if p > m { p } else { m };
            }
            row_max.push(m);
        }
        // Pass 2: first row attaining the global maximum, then first column.
        let mut best_i = 0;
        for i in 1..n {
            if row_max[i] > row_max[best_i] {
                best_i = i;
            }
        }
        let peak = row_max[best_i];
        let best_j = (0..n)
            .find(|&j| {
                let (re, im) = (ar[best_i] + br[j], ai[best_i] + bi[j]);
                re * re + im * im == peak
            })
            .expect("row maximum is attained");
        let coarse = GridPeak {
            dir: DirectionCosines::new(self.points[best_i], self.points[best_j])?,
            peak,
            correlation: Complex64::new(ar[best_i] + br[best_j], ai[best_i] + bi[best_j]),
        };
        if self.spec.refine {
            Ok(self.refine_around(y_bar, coarse))
        } else {
            Ok(coarse)
        }
    }

    fn refine_around(&self, y_bar: &[Complex64], coarse: GridPeak) -> GridPeak {
        let fine = self.spec.step / 10.0;
        let mut best = coarse;
        for a in -10..=10 {
            let omega = coarse.dir.omega() + a as f64 * fine;
            if omega.abs() >= 1.0 {
                continue;
            }
            for b in -10..=10 {
                let mu = coarse.dir.mu() + b as f64 * fine;
                if mu.abs() >= 1.0 {
                    continue;
                }
                let dir = DirectionCosines::new(omega, mu).expect("inside the unit square");
                let corr = inner(y_bar, &steering_unit(&self.geom, dir));
                if corr.norm_sqr() > best.peak {
                    best = GridPeak {
                        dir,
                        peak: corr.norm_sqr(),
                        correlation: corr,
                    };
                }
            }
        }
        best
    }
}

/// Per-point `sum_k conj(y_k) table[i][k]`, split into real and imaginary parts.
fn correlate(table: &[Complex64], y: &[Complex64], width: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let row = &table[i * width..(i + 1) * width];
        let v: Complex64 = row.iter().zip(y).map(|(a, y)| y.conj() * a).sum();
        re.push(v.re);
        im.push(v.im);
    }
    (re, im)
}

/// One-shot grid search; builds the steering tables on every call.
pub fn grid_search_direction(
    y_bar: &ReceivedVector,
    geom: &ArrayGeometry,
    grid: &GridSpec,
) -> Result<(DirectionCosines, f64)> {
    let g = DirectionGrid::new(*geom, *grid).search(&y_bar.y_bar)?;
    Ok((g.dir, g.peak))
}

/// ML estimates of the attacker's direction, power, Rician factor and phase.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EstimateSet {
    pub dir_hat: DirectionCosines,
    /// Estimate of `x^2 = P d^{-alpha}` (a power).
    pub x_sq_hat: f64,
    pub lambda_sq_hat: f64,
    /// In `[0, 2 pi)`.
    pub psi_hat: f64,
    /// `|y_bar|^2 - peak - sigma^2`; the branch selector.
    pub xi_star: f64,
    pub peak: f64,
    /// Set when `|y_bar|^2 <= sigma^2`: the observation carries no usable
    /// signal energy and the estimates are a fallback.
    pub low_confidence: bool,
}

pub fn estimate_from_peak(y_bar: &ReceivedVector, peak: &GridPeak) -> EstimateSet {
    let energy = y_bar.energy();
    let xi_star = energy - peak.peak - y_bar.sigma_sq;
    let low_confidence = energy - y_bar.sigma_sq <= 0.0;
    let (x_sq_hat, lambda_sq_hat) = if xi_star >= 0.0 && !low_confidence {
        let x_sq = energy - y_bar.sigma_sq;
        (x_sq, (peak.peak / x_sq).clamp(0.0, 1.0))
    } else {
        (peak.peak, 1.0)
    };
    let psi_hat = if peak.peak > 0.0 {
        (-peak.correlation.arg()).rem_euclid(TAU)
    } else {
        0.0
    };
    EstimateSet {
        dir_hat: peak.dir,
        x_sq_hat,
        lambda_sq_hat,
        psi_hat: if psi_hat >= TAU { 0.0 } else { psi_hat },
        xi_star,
        peak: peak.peak,
        low_confidence,
    }
}

pub fn estimate_all(y_bar: &ReceivedVector, grid: &DirectionGrid) -> Result<EstimateSet> {
    let peak = grid.search(&y_bar.y_bar)?;
    Ok(estimate_from_peak(y_bar, &peak))
}

/// The per-element negative log-likelihood being minimized:
/// `|y_bar - x lambda a_bar e^{j psi}|^2 / eps^2 + ln eps^2`,
/// `eps^2 = x^2 (1 - lambda^2) + sigma^2`.
pub fn nll_objective(
    y_bar: &ReceivedVector,
    x: f64,
    lambda: f64,
    dir: DirectionCosines,
    psi: f64,
    geom: &ArrayGeometry,
) -> Result<f64> {
    if !(x >= 0.0) || !(0.0..=1.0).contains(&lambda) {
        return Err(domain(format!("need x >= 0 and lambda in [0, 1], got ({x}, {lambda})")));
    }
    let a = steering_unit(geom, dir);
    if a.len() != y_bar.len() {
        return Err(crate::Error::Dimension {
            expected: a.len(),
            got: y_bar.len(),
        });
    }
    let amp = Complex64::from_polar(x * lambda, psi);
    let resid: Vec<Complex64> = y_bar.y_bar.iter().zip(&a).map(|(y, a)| y - a * amp).collect();
    let denom = x * x * (1.0 - lambda * lambda) + y_bar.sigma_sq;
    Ok(norm_sq(&resid) / denom + denom.ln())
}

/// `nll_objective` at an [`EstimateSet`].
pub fn nll_at_estimates(y_bar: &ReceivedVector, est: &EstimateSet, geom: &ArrayGeometry) -> Result<f64> {
    nll_objective(
        y_bar,
        est.x_sq_hat.sqrt(),
        est.lambda_sq_hat.sqrt(),
        est.dir_hat,
        est.psi_hat,
        geom,
    )
}
