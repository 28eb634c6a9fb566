//! Seeded Monte Carlo trials, empirical rates and ROC curves.
//!
//! Trial `i` of a configuration draws everything from a ChaCha8 generator
//! seeded with the configuration's master seed and positioned on stream
//! `i`, so results do not depend on how trials are scheduled across
//! threads. Statistics are computed once and cached; thresholds are
//! applied afterwards.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{ArrayGeometry, TerminalProfile};
use crate::detector::{glr_statistic, GcsKnowledge};
use crate::error::{domain, Result};
use crate::estimator::{DirectionGrid, GridSpec};
use crate::signal::{transmit, Hypothesis, NoiseParams};

/// How the attacker's phase rotation is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhaseSpec {
    Fixed(f64),
    /// Drawn uniformly on `[0, 2 pi)` for every trial.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub n_trials: usize,
    pub master_seed: u64,
    pub hypothesis: Hypothesis,
    pub gcs: GcsKnowledge,
    pub ma_profile: Option<TerminalProfile>,
    pub psi: PhaseSpec,
    pub grid: GridSpec,
    pub noise: NoiseParams,
    pub geom: ArrayGeometry,
}

impl TrialConfig {
    /// Packets from the GCS.
    pub fn legitimate(
        n_trials: usize,
        master_seed: u64,
        gcs: GcsKnowledge,
        grid: GridSpec,
        noise: NoiseParams,
        geom: ArrayGeometry,
    ) -> Self {
        Self {
            n_trials,
            master_seed,
            hypothesis: Hypothesis::H0,
            gcs,
            ma_profile: None,
            psi: PhaseSpec::Fixed(0.0),
            grid,
            noise,
            geom,
        }
    }

    /// Packets from an attacker with profile `ma`.
    #[allow(clippy::too_many_arguments)]
    pub fn spoofed(
        n_trials: usize,
        master_seed: u64,
        gcs: GcsKnowledge,
        ma: TerminalProfile,
        psi: PhaseSpec,
        grid: GridSpec,
        noise: NoiseParams,
        geom: ArrayGeometry,
    ) -> Self {
        Self {
            n_trials,
            master_seed,
            hypothesis: Hypothesis::H1,
            gcs,
            ma_profile: Some(ma),
            psi,
            grid,
            noise,
            geom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.hypothesis, &self.ma_profile) {
            (Hypothesis::H0, None) | (Hypothesis::H1, Some(_)) => {}
            _ => return Err(domain("an attacker profile is required under H1 and forbidden under H0")),
        }
        if self.hypothesis == Hypothesis::H0 && self.psi != PhaseSpec::Fixed(0.0) {
            return Err(domain("psi must be fixed at 0 under H0"));
        }
        if self.gcs.a0_bar.len() != self.geom.len() {
            return Err(crate::Error::Dimension {
                expected: self.geom.len(),
                got: self.gcs.a0_bar.len(),
            });
        }
        Ok(())
    }

    fn transmitter(&self) -> &TerminalProfile {
        self.ma_profile.as_ref().unwrap_or(&self.gcs.profile)
    }
}

/// Generator for trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Mix a master seed with a tag into an unrelated seed (SplitMix64 finalizer).
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    let mut z = master_seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One trial's statistic.
fn one_trial(cfg: &TrialConfig, grid: &DirectionGrid, index: u64) -> Result<f64> {
    let mut rng = trial_rng(cfg.master_seed, index);
    let psi = match cfg.psi {
        PhaseSpec::Fixed(p) => p,
        PhaseSpec::Uniform => rng.random::<f64>() * TAU,
    };
    let y = transmit(cfg.hypothesis, cfg.transmitter(), psi, &cfg.noise, &cfg.geom, &mut rng)?;
    glr_statistic(&y, &cfg.gcs, grid)
}

/// All trial statistics in trial order.
pub fn trial_statistics(cfg: &TrialConfig) -> Result<Vec<f64>> {
    let grid = DirectionGrid::new(cfg.geom, cfg.grid);
    trial_statistics_on(cfg, &grid)
}

/// As [`trial_statistics`] with a prebuilt grid (which must match `cfg`).
pub fn trial_statistics_on(cfg: &TrialConfig, grid: &DirectionGrid) -> Result<Vec<f64>> {
    cfg.validate()?;
    if grid.geometry() != &cfg.geom || grid.spec() != &cfg.grid {
        return Err(domain("direction grid does not match the trial configuration"));
    }
    (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|i| one_trial(cfg, grid, i))
        .collect()
}

/// A binomial proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_err: f64,
    pub n: usize,
}

impl RateEstimate {
    pub fn from_count(count: usize, n: usize) -> Self {
        if n == 0 {
            return Self {
                rate: 0.0,
                std_err: 0.0,
                n,
            };
        }
        let rate = count as f64 / n as f64;
        Self {
            rate,
            std_err: (rate * (1.0 - rate) / n as f64).sqrt(),
            n,
        }
    }
}

/// Cached statistics sorted for repeated threshold queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedStatistics {
    values: Vec<f64>,
}

impl SortedStatistics {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Fraction of statistics strictly above `threshold`.
    pub fn exceedance(&self, threshold: f64) -> RateEstimate {
        let at_or_below = self.values.partition_point(|&t| t <= threshold);
        RateEstimate::from_count(self.values.len() - at_or_below, self.values.len())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Empirical `P{T > threshold}` under `cfg`.
pub fn run_trials(cfg: &TrialConfig, threshold: f64) -> Result<RateEstimate> {
    let stats = trial_statistics(cfg)?;
    let count = stats.iter().filter(|&&t| t > threshold).count();
    Ok(RateEstimate::from_count(count, stats.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: RateEstimate,
    pub sdr: RateEstimate,
}

/// Sweep ascending `thresholds` over cached statistics from both hypotheses.
pub fn roc_curve(cfg_h0: &TrialConfig, cfg_h1: &TrialConfig, thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if cfg_h0.hypothesis != Hypothesis::H0 || cfg_h1.hypothesis != Hypothesis::H1 {
        return Err(domain("roc_curve needs an H0 and an H1 configuration"));
    }
    if cfg_h0.geom != cfg_h1.geom || cfg_h0.noise != cfg_h1.noise || cfg_h0.grid != cfg_h1.grid {
        return Err(domain("H0 and H1 configurations must share geometry, noise and grid"));
    }
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(domain("thresholds must be ascending"));
    }
    let grid = DirectionGrid::new(cfg_h0.geom, cfg_h0.grid);
    let h0 = SortedStatistics::new(trial_statistics_on(cfg_h0, &grid)?);
    let h1 = SortedStatistics::new(trial_statistics_on(cfg_h1, &grid)?);
    Ok(roc_from_statistics(&h0, &h1, thresholds))
}

pub fn roc_from_statistics(h0: &SortedStatistics, h1: &SortedStatistics, thresholds: &[f64]) -> Vec<RocPoint> {
    thresholds
        .iter()
        .map(|&t| RocPoint {
            threshold: t,
            far: h0.exceedance(t),
            sdr: h1.exceedance(t),
        })
        .collect()
}
