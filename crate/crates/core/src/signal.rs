//! Packet transmission under either hypothesis and matched filtering.
//!
//! A packet carries a known unit-norm training sequence `s`. The UAV
//! receives `Y = sqrt(P) f s^H e^{j psi} + N` and matches it with `s` to get
//! `y = Y s`, then works with `y_bar = y / sqrt(L)`. Everything downstream
//! depends on the noise only through the post-matching per-element
//! variance `sigma^2`, so that is the configured quantity.

use num_complex::Complex64;
use rand::Rng;

use crate::array::{assemble_channel, complex_normal, norm_sq, ArrayGeometry, TerminalProfile};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Hypothesis {
    /// Packet sent by the ground control station.
    H0,
    /// Packet sent by an attacker.
    H1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence {
    s: Vec<Complex64>,
}

impl TrainingSequence {
    pub fn new(s: Vec<Complex64>) -> Result<Self> {
        if s.is_empty() {
            return Err(domain("training sequence must be non-empty"));
        }
        let n = norm_sq(&s);
        if (n - 1.0).abs() > 1e-12 {
            return Err(domain(format!("training sequence must have unit norm, got {n}")));
        }
        Ok(Self { s })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Random complex-Gaussian sequence scaled to unit norm.
pub fn gen_training<R: Rng + ?Sized>(length: usize, rng: &mut R) -> Result<TrainingSequence> {
    if length == 0 {
        return Err(domain("training sequence length must be at least 1"));
    }
    loop {
        let raw: Vec<Complex64> = (0..length).map(|_| complex_normal(rng, 1.0)).collect();
        let n = norm_sq(&raw).sqrt();
        if n > 0.0 {
            let s = raw.into_iter().map(|z| z / n).collect();
            return TrainingSequence::new(s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    sigma_sq: f64,
}

impl NoiseParams {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(domain(format!("sigma^2 must be positive, got {sigma_sq}")));
        }
        Ok(Self { sigma_sq })
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }
}

/// Post-matched-filter observation `y_bar = y / sqrt(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedVector {
    pub y_bar: Vec<Complex64>,
    pub sigma_sq: f64,
}

impl ReceivedVector {
    /// Normalize a matched-filter output `y`.
    pub fn from_matched(y: &[Complex64], sigma_sq: f64) -> Self {
        let scale = 1.0 / (y.len() as f64).sqrt();
        Self {
            y_bar: y.iter().map(|z| z * scale).collect(),
            sigma_sq,
        }
    }

    pub fn len(&self) -> usize {
        self.y_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_bar.is_empty()
    }

    pub fn energy(&self) -> f64 {
        norm_sq(&self.y_bar)
    }
}

fn check_phase(hyp: Hypothesis, psi: f64) -> Result<()> {
    if !psi.is_finite() {
        return Err(domain("phase must be finite"));
    }
    if hyp == Hypothesis::H0 && psi != 0.0 {
        return Err(domain("the GCS applies no phase rotation; psi must be 0 under H0"));
    }
    Ok(())
}

/// The noiseless matched-filter output `sqrt(P) f e^{j psi}` for a fresh
/// channel draw.
pub fn received_signal<R: Rng + ?Sized>(
    hyp: Hypothesis,
    profile: &TerminalProfile,
    psi: f64,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_phase(hyp, psi)?;
    let h: Vec<Complex64> = (0..geom.len()).map(|_| complex_normal(rng, 1.0)).collect();
    let rot = Complex64::from_polar(profile.power_mw().sqrt(), psi);
    Ok(assemble_channel(profile, geom, &h)
        .into_iter()
        .map(|f| f * rot)
        .collect())
}

/// Draw one packet's `y_bar` directly from the post-matching model
/// `y = sqrt(P) d^{-alpha/2} (lambda a + delta h) e^{j psi} + n`,
/// `n ~ CN(0, sigma^2 I)`.
pub fn transmit<R: Rng + ?Sized>(
    hyp: Hypothesis,
    profile: &TerminalProfile,
    psi: f64,
    noise: &NoiseParams,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Result<ReceivedVector> {
    let mut y = received_signal(hyp, profile, psi, geom, rng)?;
    for v in y.iter_mut() {
        *v += complex_normal(rng, noise.sigma_sq);
    }
    Ok(ReceivedVector::from_matched(&y, noise.sigma_sq))
}

/// `L x L_s` received packet, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl PacketMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    /// Rank-one packet `f s^H`.
    pub fn outer(f: &[Complex64], s: &TrainingSequence) -> Self {
        let cols = s.len();
        let data = f
            .iter()
            .flat_map(|fi| s.as_slice().iter().map(move |sj| fi * sj.conj()))
            .collect();
        Self {
            rows: f.len(),
            cols,
            data,
        }
    }
}

/// `y = Y s`.
pub fn matched_filter(packet: &PacketMatrix, s: &TrainingSequence) -> Result<Vec<Complex64>> {
    if packet.cols != s.len() {
        return Err(Error::Dimension {
            expected: packet.cols,
            got: s.len(),
        });
    }
    Ok(packet
        .data
        .chunks_exact(packet.cols)
        .map(|row| row.iter().zip(s.as_slice()).map(|(y, s)| y * s).sum())
        .collect())
}

/// Full packet path: form `Y = sqrt(P) f s^H e^{j psi} + N` explicitly,
/// matched-filter it, normalize.
///
/// With `|s| = 1` the matched filter leaves the noise variance per element
/// unchanged, so `N` is drawn with per-entry variance `sigma^2`.
pub fn transmit_packet<R: Rng + ?Sized>(
    hyp: Hypothesis,
    profile: &TerminalProfile,
    psi: f64,
    s: &TrainingSequence,
    noise: &NoiseParams,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Result<ReceivedVector> {
    let f = received_signal(hyp, profile, psi, geom, rng)?;
    let mut packet = PacketMatrix::outer(&f, s);
    for v in packet.data.iter_mut() {
        *v += complex_normal(rng, noise.sigma_sq);
    }
    let y = matched_filter(&packet, s)?;
    Ok(ReceivedVector::from_matched(&y, noise.sigma_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{steering_vector, DirectionCosines};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn profile(l2: f64) -> TerminalProfile {
        TerminalProfile::new(100.0, 20.0, l2, DirectionCosines::new(0.22, 0.13).unwrap(), 2.0)
            .unwrap()
    }

    #[test]
    fn training_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = gen_training(1, &mut rng).unwrap();
        assert!((s.as_slice()[0].norm() - 1.0).abs() < 1e-15);
        for len in [2, 16, 129] {
            let s = gen_training(len, &mut rng).unwrap();
            assert!((norm_sq(s.as_slice()) - 1.0).abs() < 1e-12);
        }
        let a = gen_training(32, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = gen_training(32, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(gen_training(0, &mut rng).is_err());
    }

    #[test]
    fn noiseless_los_signal() {
        let g = ArrayGeometry::new(3, 4).unwrap();
        let p = profile(1.0);
        let y = received_signal(Hypothesis::H0, &p, 0.0, &g, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        let ybar = ReceivedVector::from_matched(&y, 1.0);
        let a = steering_vector(&g, p.direction());
        let scale = 100f64.sqrt() / 20.0 / (g.len() as f64).sqrt();
        for (y, a) in ybar.y_bar.iter().zip(&a) {
            assert!((y - a * scale).norm() < 1e-14);
        }
    }

    #[test]
    fn attacker_phase_rotates_los() {
        let g = ArrayGeometry::new(3, 4).unwrap();
        let p = profile(1.0);
        let y0 = received_signal(Hypothesis::H1, &p, 0.0, &g, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        let y1 = received_signal(Hypothesis::H1, &p, PI, &g, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        for (a, b) in y0.iter().zip(&y1) {
            assert!((a + b).norm() < 1e-14);
        }
    }

    #[test]
    fn gcs_cannot_rotate() {
        let g = ArrayGeometry::new(1, 1).unwrap();
        let noise = NoiseParams::new(0.1).unwrap();
        let r = transmit(Hypothesis::H0, &profile(0.5), 0.3, &noise, &g, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(r.is_err());
    }

    #[test]
    fn received_variance_matches_eps_over_l() {
        let g = ArrayGeometry::new(1, 2).unwrap();
        let p = profile(0.8);
        let noise = NoiseParams::new(0.01).unwrap();
        let k = crate::array::link_constants(&p, 0.01).unwrap();
        let l = g.len() as f64;
        let mean: Vec<_> = crate::array::steering_unit(&g, p.direction())
            .into_iter()
            .map(|a| a * k.los_amp)
            .collect();
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut acc = vec![0.0; g.len()];
        for _ in 0..n {
            let r = transmit(Hypothesis::H0, &p, 0.0, &noise, &g, &mut rng).unwrap();
            for (i, (y, m)) in r.y_bar.iter().zip(&mean).enumerate() {
                acc[i] += (y - m).norm_sqr();
            }
        }
        let target = k.eps_sq / l;
        for a in acc {
            let v = a / n as f64;
            assert!((v - target).abs() < 3.0 * target / (n as f64).sqrt(), "{v} vs {target}");
        }
    }

    #[test]
    fn matched_filter_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = gen_training(8, &mut rng).unwrap();
        let f: Vec<_> = (0..5).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let y = matched_filter(&PacketMatrix::outer(&f, &s), &s).unwrap();
        for (a, b) in y.iter().zip(&f) {
            assert!((a - b).norm() < 1e-14);
        }
        let z = matched_filter(&PacketMatrix::zeros(5, 8), &s).unwrap();
        assert!(z.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(matched_filter(&PacketMatrix::zeros(5, 7), &s).is_err());
        assert!(PacketMatrix::new(2, 2, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn matched_filter_against_naive_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (rows, cols) = (7, 11);
        let data: Vec<_> = (0..rows * cols).map(|_| complex_normal(&mut rng, 2.0)).collect();
        let packet = PacketMatrix::new(rows, cols, data).unwrap();
        let s = gen_training(cols, &mut rng).unwrap();
        let y = matched_filter(&packet, &s).unwrap();
        for r in 0..rows {
            let (mut re, mut im) = (0.0, 0.0);
            for c in 0..cols {
                let (a, b) = (packet.get(r, c), s.as_slice()[c]);
                re += a.re * b.re - a.im * b.im;
                im += a.re * b.im + a.im * b.re;
            }
            assert!((y[r] - Complex64::new(re, im)).norm() < 1e-12);
        }
    }
}
