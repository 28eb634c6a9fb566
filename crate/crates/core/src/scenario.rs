//! Scenario files: line-oriented `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored, as is anything after
//! a `#` on a value line. Keys may appear once. Angles take a `deg` or `rad`
//! suffix (bare numbers are degrees); powers take `dBm` or `mW` (bare
//! numbers are mW). See the README for the full key list.

use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use crate::analytic::FarModel;
use crate::array::{angles_to_cosines, distance_from_height, AnglePair, ArrayGeometry, TerminalProfile};
use crate::detector::GcsKnowledge;
use crate::error::{Error, Result};
use crate::estimator::GridSpec;
use crate::montecarlo::PhaseSpec;
use crate::signal::NoiseParams;

/// `10^{dBm/10}`, exact for whole multiples of 10 dBm.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    let tenths = dbm / 10.0;
    if tenths.fract() == 0.0 && tenths.abs() < 300.0 {
        10f64.powi(tenths as i32)
    } else {
        10f64.powf(tenths)
    }
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// One terminal as written in a scenario: angles in radians, power in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerminalSpec {
    pub theta: f64,
    pub phi: f64,
    pub power_mw: f64,
    pub lambda_sq: f64,
    /// Explicit distance; otherwise `height / cos(theta)`.
    pub distance: Option<f64>,
}

impl TerminalSpec {
    pub fn profile(&self, height: f64, path_loss_exp: f64) -> Result<TerminalProfile> {
        let angles = AnglePair::new(self.theta, self.phi)?;
        let d = match self.distance {
            Some(d) => d,
            None => distance_from_height(height, self.theta)?,
        };
        TerminalProfile::new(self.power_mw, d, self.lambda_sq, angles_to_cosines(angles), path_loss_exp)
    }
}

/// Built-in attacker placements (theta, phi, lambda^2) near the default GCS at
/// 15 deg / 30 deg; offsets of a few degrees already push the detection rate
/// to one, so these stay within the array's resolution.
pub const NAMED_ATTACKERS: [&str; 3] = ["near", "mid", "far"];

fn named_attacker(name: &str, gcs: &TerminalSpec) -> Option<TerminalSpec> {
    let (theta, phi, lambda_sq) = match name {
        "near" => (15.0, 31.0, gcs.lambda_sq),
        "mid" => (16.0, 30.0, gcs.lambda_sq),
        "far" => (16.0, 33.0, 0.6),
        _ => return None,
    };
    Some(TerminalSpec {
        theta: f64::to_radians(theta),
        phi: f64::to_radians(phi),
        power_mw: gcs.power_mw,
        lambda_sq,
        distance: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attacker {
    pub name: String,
    pub spec: TerminalSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    Theta1,
    Phi1,
    Lambda1Sq,
    P1,
}

impl SweepVar {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "theta1" => Self::Theta1,
            "phi1" => Self::Phi1,
            "lambda1_sq" => Self::Lambda1Sq,
            "p1" => Self::P1,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Theta1 => "theta1",
            Self::Phi1 => "phi1",
            Self::Lambda1Sq => "lambda1_sq",
            Self::P1 => "p1",
        }
    }

    /// Unit of the emitted sweep values.
    pub fn unit(&self) -> &'static str {
        match self {
            Self::Theta1 | Self::Phi1 => "deg",
            Self::Lambda1Sq => "1",
            Self::P1 => "dBm",
        }
    }

    /// Default `(start, stop, step)` in display units.
    pub fn default_range(&self) -> (f64, f64, f64) {
        match self {
            Self::Theta1 => (5.0, 25.0, 1.0),
            Self::Phi1 => (20.0, 40.0, 1.0),
            Self::Lambda1Sq => (0.55, 1.0, 0.05),
            Self::P1 => (10.0, 30.0, 2.0),
        }
    }

    /// Replace the swept field of `base` with `value` (display units).
    pub fn apply(&self, base: &TerminalSpec, value: f64) -> TerminalSpec {
        let mut s = *base;
        match self {
            Self::Theta1 => s.theta = value.to_radians(),
            Self::Phi1 => s.phi = value.to_radians(),
            Self::Lambda1Sq => s.lambda_sq = value,
            Self::P1 => s.power_mw = dbm_to_mw(value),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub var: Option<SweepVar>,
    /// Display units; `None` falls back to the variable's default range.
    pub range: Option<(f64, f64, f64)>,
}

impl SweepSpec {
    /// `start + i * step` up to `stop`, in display units.
    pub fn values(&self, var: SweepVar) -> Vec<f64> {
        let (start, stop, step) = self.range.unwrap_or_else(|| var.default_range());
        let n = ((stop - start) / step + 1e-9).floor() as i64;
        (0..=n.max(-1))
            .map(|i| {
                let v = start + i as f64 * step;
                // keep decimal grids tidy (0.55 + 6 * 0.05 -> 0.85, not 0.8500000000000001)
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

/// The thresholds of the ROC sweep: `far_threshold(eta)` for `count`
/// log-spaced values of `eta` from `eta_max` down to `eta_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauGrid {
    pub eta_max: f64,
    pub eta_min: f64,
    pub count: usize,
}

impl TauGrid {
    pub fn etas(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.eta_max],
            n => {
                let (a, b) = (self.eta_max.ln(), self.eta_min.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(skip)]
    pub geom: ArrayGeometry,
    pub sigma_sq: f64,
    pub height: f64,
    pub path_loss_exp: f64,
    pub gcs: TerminalSpec,
    /// Base attacker for sweeps and the estimate demo.
    pub ma: TerminalSpec,
    /// Attackers for the ROC command.
    pub attackers: Vec<Attacker>,
    pub psi: PhaseSpec,
    pub grid_step: f64,
    pub grid_refine: bool,
    pub trials: usize,
    pub h0_trials: Option<usize>,
    pub seed: u64,
    pub etas: Vec<f64>,
    pub k_split: u32,
    pub tau: TauGrid,
    pub sweep: SweepSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        let gcs = TerminalSpec {
            theta: 15f64.to_radians(),
            phi: 30f64.to_radians(),
            power_mw: 100.0,
            lambda_sq: 0.8,
            distance: None,
        };
        Self {
            geom: ArrayGeometry::t_shaped_25(),
            sigma_sq: 0.01,
            height: 20.0,
            path_loss_exp: 2.0,
            gcs,
            ma: gcs,
            attackers: NAMED_ATTACKERS
                .iter()
                .map(|n| Attacker {
                    name: n.to_string(),
                    spec: named_attacker(n, &gcs).unwrap(),
                })
                .collect(),
            psi: PhaseSpec::Fixed(0.0),
            grid_step: 0.005,
            grid_refine: false,
            trials: 20_000,
            h0_trials: None,
            seed: 1,
            etas: vec![0.02, 0.05, 0.1],
            k_split: 2,
            tau: TauGrid {
                eta_max: 0.99,
                eta_min: 0.001,
                count: 25,
            },
            sweep: SweepSpec {
                var: None,
                range: None,
            },
        }
    }
}

impl Scenario {
    pub fn noise(&self) -> Result<NoiseParams> {
        NoiseParams::new(self.sigma_sq)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.grid_step)?.with_refinement(self.grid_refine))
    }

    pub fn far_model(&self) -> Result<FarModel> {
        FarModel::new(self.geom.len() as u32, self.k_split)
    }

    pub fn profile(&self, spec: &TerminalSpec) -> Result<TerminalProfile> {
        spec.profile(self.height, self.path_loss_exp)
    }

    pub fn gcs_knowledge(&self) -> Result<GcsKnowledge> {
        GcsKnowledge::new(self.profile(&self.gcs)?, &self.geom, &self.noise()?)
    }

    /// Number of H0 trials (defaults to `trials`).
    pub fn h0_trial_count(&self) -> usize {
        self.h0_trials.unwrap_or(self.trials)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        let mut seen = HashSet::new();
        let mut m_half = sc.geom.m_half();
        let mut n_y = sc.geom.n_y();
        let mut ma_fields: Vec<(usize, &str, &str)> = vec![];
        let mut attackers: Option<(usize, Vec<String>)> = None;
        let mut sweep_parts: [Option<(usize, &str)>; 3] = [None; 3];
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let at = |e: Error| match e {
                Error::Parse { .. } => e,
                other => Error::Parse {
                    line,
                    msg: other.to_string(),
                },
            };
            match key {
                "m_half" => m_half = parse_int(value).map_err(err)?,
                "n_y" => n_y = parse_int(value).map_err(err)?,
                "sigma_sq" => sc.sigma_sq = parse_power(value).map_err(err)?,
                "height" => sc.height = parse_length(value).map_err(err)?,
                "path_loss_exp" => sc.path_loss_exp = parse_num(value).map_err(err)?,
                "gcs.theta" => sc.gcs.theta = parse_angle(value).map_err(err)?,
                "gcs.phi" => sc.gcs.phi = parse_angle(value).map_err(err)?,
                "gcs.power" => sc.gcs.power_mw = parse_power(value).map_err(err)?,
                "gcs.lambda_sq" => sc.gcs.lambda_sq = parse_num(value).map_err(err)?,
                "gcs.distance" => sc.gcs.distance = Some(parse_length(value).map_err(err)?),
                "ma.theta" | "ma.phi" | "ma.power" | "ma.lambda_sq" | "ma.distance" => {
                    ma_fields.push((line, key, value))
                }
                "attackers" => attackers = Some((line, split_list(value))),
                "psi" => {
                    sc.psi = if value == "uniform" {
                        PhaseSpec::Uniform
                    } else {
                        PhaseSpec::Fixed(parse_angle(value).map_err(err)?)
                    }
                }
                "grid.step" => sc.grid_step = parse_num(value).map_err(err)?,
                "grid.refine" => sc.grid_refine = parse_bool(value).map_err(err)?,
                "trials" => sc.trials = parse_int(value).map_err(err)?,
                "h0_trials" => sc.h0_trials = Some(parse_int(value).map_err(err)?),
                "seed" => sc.seed = value.parse().map_err(|_| err(format!("invalid seed `{value}`")))?,
                "eta" => {
                    sc.etas = split_list(value)
                        .iter()
                        .map(|v| parse_num(v))
                        .collect::<std::result::Result<_, _>>()
                        .map_err(err)?;
                    if let Some(bad) = sc.etas.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                        return Err(err(format!("eta values must lie in (0, 1), got {bad}")));
                    }
                }
                "far.k" => sc.k_split = parse_int(value).map_err(err)?,
                "tau.eta_max" => sc.tau.eta_max = parse_num(value).map_err(err)?,
                "tau.eta_min" => sc.tau.eta_min = parse_num(value).map_err(err)?,
                "tau.count" => sc.tau.count = parse_int(value).map_err(err)?,
                "sweep.var" => {
                    sc.sweep.var = Some(SweepVar::parse(value).ok_or_else(|| {
                        err(format!("unknown sweep variable `{value}` (theta1, phi1, lambda1_sq, p1)"))
                    })?)
                }
                "sweep.start" => sweep_parts[0] = Some((line, value)),
                "sweep.stop" => sweep_parts[1] = Some((line, value)),
                "sweep.step" => sweep_parts[2] = Some((line, value)),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
            // validate what can be validated per line
            if key == "grid.step" {
                GridSpec::new(sc.grid_step).map_err(at)?;
            }
            if key == "sigma_sq" {
                NoiseParams::new(sc.sigma_sq).map_err(at)?;
            }
        }

        sc.geom = ArrayGeometry::new(m_half, n_y).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;

        // The custom attacker inherits every unspecified field from the GCS.
        sc.ma = sc.gcs;
        for &(line, key, value) in &ma_fields {
            let err = |msg: String| Error::Parse { line, msg };
            match key {
                "ma.theta" => sc.ma.theta = parse_angle(value).map_err(err)?,
                "ma.phi" => sc.ma.phi = parse_angle(value).map_err(err)?,
                "ma.power" => sc.ma.power_mw = parse_power(value).map_err(err)?,
                "ma.lambda_sq" => sc.ma.lambda_sq = parse_num(value).map_err(err)?,
                "ma.distance" => sc.ma.distance = Some(parse_length(value).map_err(err)?),
                _ => unreachable!(),
            }
        }

        let names = match attackers {
            Some(a) => a,
            None if !ma_fields.is_empty() => (0, vec!["custom".to_string()]),
            None => (0, NAMED_ATTACKERS.iter().map(|s| s.to_string()).collect()),
        };
        sc.attackers = names
            .1
            .iter()
            .map(|n| {
                let spec = if n == "custom" {
                    Some(sc.ma)
                } else {
                    named_attacker(n, &sc.gcs)
                };
                spec.map(|spec| Attacker { name: n.clone(), spec }).ok_or_else(|| Error::Parse {
                    line: names.0,
                    msg: format!("unknown attacker `{n}` (near, mid, far, custom)"),
                })
            })
            .collect::<Result<_>>()?;

        if sweep_parts.iter().any(|p| p.is_some()) {
            let var = sc.sweep.var.ok_or_else(|| Error::Parse {
                line: sweep_parts.iter().flatten().next().unwrap().0,
                msg: "sweep.start/stop/step need sweep.var".into(),
            })?;
            let mut r = [0.0; 3];
            let defaults = var.default_range();
            let defaults = [defaults.0, defaults.1, defaults.2];
            for (i, part) in sweep_parts.iter().enumerate() {
                r[i] = match part {
                    None => defaults[i],
                    Some((line, v)) => {
                        parse_sweep_value(var, v, i == 2).map_err(|msg| Error::Parse { line: *line, msg })?
                    }
                };
            }
            if !(r[2] > 0.0) || r[1] < r[0] {
                return Err(Error::Parse {
                    line: sweep_parts[2].map_or(last_line, |p| p.0),
                    msg: "sweep needs start <= stop and a positive step".into(),
                });
            }
            sc.sweep.range = Some((r[0], r[1], r[2]));
        }

        if !(sc.tau.eta_min > 0.0 && sc.tau.eta_min <= sc.tau.eta_max && sc.tau.eta_max < 1.0) {
            return Err(Error::Parse {
                line: last_line,
                msg: "need 0 < tau.eta_min <= tau.eta_max < 1".into(),
            });
        }
        sc.validate().map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(sc)
    }

    /// Check that every profile can be built.
    pub fn validate(&self) -> Result<()> {
        self.noise()?;
        self.grid()?;
        self.far_model()?;
        self.gcs_knowledge()?;
        self.profile(&self.ma)?;
        for a in &self.attackers {
            self.profile(&a.spec)?;
        }
        Ok(())
    }
}

type Parsed<T> = std::result::Result<T, String>;

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_num(value: &str) -> Parsed<f64> {
    let v: f64 = value.trim().parse().map_err(|_| format!("invalid number `{value}`"))?;
    if !v.is_finite() {
        return Err(format!("value must be finite, got `{value}`"));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(value: &str) -> Parsed<T> {
    value.trim().parse().map_err(|_| format!("invalid integer `{value}`"))
}

fn parse_bool(value: &str) -> Parsed<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid boolean `{value}`")),
    }
}

/// Split a trailing alphabetic unit from a number.
fn split_unit(value: &str) -> (&str, &str) {
    let idx = value
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_alphabetic())
        .last()
        .map_or(value.len(), |(i, _)| i);
    // keep exponents such as 1e-3 intact
    let (num, unit) = value.split_at(idx);
    if unit.eq_ignore_ascii_case("e") {
        return (value, "");
    }
    (num.trim(), unit)
}

/// Radians; bare numbers are degrees.
fn parse_angle(value: &str) -> Parsed<f64> {
    let (num, unit) = split_unit(value);
    let v = parse_num(num)?;
    match unit {
        "" | "deg" => Ok(v.to_radians()),
        "rad" => Ok(v),
        _ => Err(format!("unknown angle unit `{unit}` (deg or rad)")),
    }
}

/// Milliwatts; bare numbers are mW.
fn parse_power(value: &str) -> Parsed<f64> {
    let (num, unit) = split_unit(value);
    let v = parse_num(num)?;
    match unit {
        "" | "mW" | "mw" => Ok(v),
        "dBm" | "dbm" => Ok(dbm_to_mw(v)),
        _ => Err(format!("unknown power unit `{unit}` (mW or dBm)")),
    }
}

fn parse_length(value: &str) -> Parsed<f64> {
    let (num, unit) = split_unit(value);
    match unit {
        "" | "m" => parse_num(num),
        _ => Err(format!("unknown length unit `{unit}` (m)")),
    }
}

/// A sweep bound or step in the variable's display unit.
fn parse_sweep_value(var: SweepVar, value: &str, is_step: bool) -> Parsed<f64> {
    match var {
        SweepVar::Theta1 | SweepVar::Phi1 => Ok(parse_angle(value)?.to_degrees()),
        SweepVar::Lambda1Sq => parse_num(value),
        SweepVar::P1 => {
            let (num, unit) = split_unit(value);
            match unit {
                "" | "dBm" | "dbm" => parse_num(num),
                "mW" | "mw" if !is_step => Ok(mw_to_dbm(parse_num(num)?)),
                _ => Err(format!("power sweep values take dBm, got `{value}`")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion_exact() {
        assert_eq!(dbm_to_mw(20.0), 100.0);
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert_eq!(dbm_to_mw(-20.0), 0.01);
        assert!((dbm_to_mw(13.0) - 19.952623149688797).abs() < 1e-12);
        assert_eq!(parse_power("20 dBm").unwrap(), 100.0);
        assert_eq!(parse_power("20dBm").unwrap(), 100.0);
        assert_eq!(parse_power("5e-1").unwrap(), 0.5);
    }

    #[test]
    fn units() {
        assert_eq!(parse_angle("15").unwrap(), 15f64.to_radians());
        assert_eq!(parse_angle("15 deg").unwrap(), 15f64.to_radians());
        assert_eq!(parse_angle("0.5rad").unwrap(), 0.5);
        assert!(parse_angle("3 grad").is_err());
        assert_eq!(parse_length("20 m").unwrap(), 20.0);
    }

    #[test]
    fn defaults_round_trip() {
        let sc = Scenario::parse("").unwrap();
        assert_eq!(sc, Scenario::default());
        assert_eq!(sc.geom.len(), 25);
    }

    #[test]
    fn full_file() {
        let text = "\
# comment
m_half = 6
n_y = 12
sigma_sq = 0.01 mW
gcs.theta = 15 deg   # trailing comment
gcs.phi = 30deg
gcs.power = 20 dBm
gcs.lambda_sq = 0.85
ma.phi = 34 deg
eta = 0.02, 0.05, 0.1
sweep.var = p1
sweep.start = 10 dBm
sweep.stop = 30 dBm
sweep.step = 2
";
        let sc = Scenario::parse(text).unwrap();
        assert_eq!(sc.gcs.power_mw, 100.0);
        assert_eq!(sc.ma.lambda_sq, 0.85);
        assert_eq!(sc.ma.phi, 34f64.to_radians());
        assert_eq!(sc.ma.theta, sc.gcs.theta);
        assert_eq!(sc.attackers.len(), 1);
        assert_eq!(sc.attackers[0].name, "custom");
        let v = sc.sweep.values(SweepVar::P1);
        assert_eq!(v.len(), 11);
        assert_eq!(v[5], 20.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match Scenario::parse("seed = 3\nbogus = 1\n") {
            Err(Error::Parse { line: 2, msg }) => assert!(msg.contains("bogus")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Scenario::parse("trials = 4\ntrials = 5"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Scenario::parse("\n\nsigma_sq = -1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(Scenario::parse("no equals sign"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Scenario::parse("attackers = near, nowhere"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Scenario::parse("sweep.var = height"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_eta_list() {
        assert!(Scenario::parse("eta =").unwrap().etas.is_empty());
    }

    #[test]
    fn sweep_grid_is_tidy() {
        let s = SweepSpec { var: None, range: None };
        let v = s.values(SweepVar::Lambda1Sq);
        assert_eq!(v.len(), 10);
        assert!(v.contains(&0.85));
        assert_eq!(s.values(SweepVar::Theta1).len(), 21);
    }
}
