//! Experiment recipes behind the CLI: threshold tables, ROC curves, the
//! parameter sweeps and a single-packet estimation dump.
//!
//! CSV output starts with one `#` metadata line, then a header row. Numbers
//! use Rust's shortest round-trip formatting, so identical inputs give
//! byte-identical files regardless of thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{build_sdr_model, far_ccdf, far_threshold, sdr_ccdf, FarModel};
use crate::array::{link_constants, DirectionCosines};
use crate::detector::glr_statistic_detailed;
use crate::error::{Error, Result};
use crate::estimator::{estimate_all, nll_at_estimates, nll_objective, DirectionGrid, EstimateSet};
use crate::montecarlo::{
    derive_seed, trial_rng, trial_statistics_on, PhaseSpec, SortedStatistics, TrialConfig,
};
use crate::scenario::{Scenario, SweepVar, TerminalSpec};
use crate::signal::{transmit, Hypothesis};

const H0_TAG: u64 = 0;
const H1_TAG: u64 = 1;
const DEMO_TAG: u64 = 2;

fn metadata(command: &str, sc: &Scenario, extra: &str) -> String {
    let mut s = format!(
        "# uavauth {} command={command} seed={} grid_step={} trials={} k_split={} L={} sigma_sq={}",
        env!("CARGO_PKG_VERSION"),
        sc.seed,
        sc.grid_step,
        sc.trials,
        sc.k_split,
        sc.geom.len(),
        sc.sigma_sq,
    );
    if !extra.is_empty() {
        s.push(' ');
        s.push_str(extra);
    }
    s.push('\n');
    s
}

fn psi_label(psi: PhaseSpec) -> String {
    match psi {
        PhaseSpec::Fixed(p) => format!("{p}"),
        PhaseSpec::Uniform => "uniform".into(),
    }
}

/// `eta,tau` for every target false-alarm rate.
pub fn cmd_threshold(sc: &Scenario) -> Result<String> {
    let model = sc.far_model()?;
    let mut out = metadata("threshold", sc, "");
    out.push_str("eta,tau\n");
    for &eta in &sc.etas {
        writeln!(out, "{eta},{}", far_threshold(eta, &model)?).unwrap();
    }
    Ok(out)
}

/// Thresholds of the ROC sweep, ascending.
pub fn roc_thresholds(sc: &Scenario, model: &FarModel) -> Result<Vec<f64>> {
    let mut ts = sc
        .tau
        .etas()
        .iter()
        .map(|&eta| far_threshold(eta, model))
        .collect::<Result<Vec<_>>>()?;
    ts.sort_by(f64::total_cmp);
    Ok(ts)
}

fn h0_config(sc: &Scenario, n: usize) -> Result<TrialConfig> {
    Ok(TrialConfig::legitimate(
        n,
        derive_seed(sc.seed, H0_TAG),
        sc.gcs_knowledge()?,
        sc.grid()?,
        sc.noise()?,
        sc.geom,
    ))
}

/// H1 trials share one seed across attackers and sweep points, so the
/// curves are computed with common random numbers.
fn h1_config(sc: &Scenario, ma: &TerminalSpec, n: usize) -> Result<TrialConfig> {
    Ok(TrialConfig::spoofed(
        n,
        derive_seed(sc.seed, H1_TAG),
        sc.gcs_knowledge()?,
        sc.profile(ma)?,
        sc.psi,
        sc.grid()?,
        sc.noise()?,
        sc.geom,
    ))
}

fn analytic_sdr(sc: &Scenario, ma: &TerminalSpec, tau: f64) -> Result<Option<f64>> {
    match sc.psi {
        PhaseSpec::Fixed(psi) => {
            let model = build_sdr_model(&sc.gcs_knowledge()?, &sc.profile(ma)?, psi, &sc.geom)?;
            Ok(Some(sdr_ccdf(tau, &model).value))
        }
        PhaseSpec::Uniform => Ok(None),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// One row of a ROC table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocRow {
    pub attacker: String,
    pub tau: f64,
    pub far_analytic: f64,
    pub far_empirical: Option<f64>,
    pub sdr_analytic: Option<f64>,
    pub sdr_empirical: Option<f64>,
}

/// Analytic and empirical FAR/SDR over the threshold grid for every attacker.
pub fn roc_rows(sc: &Scenario) -> Result<Vec<RocRow>> {
    let model = sc.far_model()?;
    let taus = roc_thresholds(sc, &model)?;
    let grid = DirectionGrid::new(sc.geom, sc.grid()?);
    let h0 = if sc.h0_trial_count() > 0 {
        Some(SortedStatistics::new(trial_statistics_on(&h0_config(sc, sc.h0_trial_count())?, &grid)?))
    } else {
        None
    };
    let far: Vec<f64> = taus.par_iter().map(|&t| far_ccdf(t, &model)).collect();
    let mut rows = vec![];
    for a in &sc.attackers {
        let h1 = if sc.trials > 0 {
            Some(SortedStatistics::new(trial_statistics_on(&h1_config(sc, &a.spec, sc.trials)?, &grid)?))
        } else {
            None
        };
        let sdr: Vec<Option<f64>> = taus
            .par_iter()
            .map(|&t| analytic_sdr(sc, &a.spec, t))
            .collect::<Result<_>>()?;
        for (i, &tau) in taus.iter().enumerate() {
            rows.push(RocRow {
                attacker: a.name.clone(),
                tau,
                far_analytic: far[i],
                far_empirical: h0.as_ref().map(|s| s.exceedance(tau).rate),
                sdr_analytic: sdr[i],
                sdr_empirical: h1.as_ref().map(|s| s.exceedance(tau).rate),
            });
        }
    }
    Ok(rows)
}

/// CSV: `attacker,tau,far_analytic,far_empirical,sdr_analytic,sdr_empirical`
/// (the empirical columns are dropped when the trial count is zero).
/// Drop round-off from degree conversions in comment lines.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

pub fn cmd_roc(sc: &Scenario) -> Result<String> {
    let rows = roc_rows(sc)?;
    let empirical = sc.trials > 0;
    let mut out = metadata("roc", sc, &format!("h0_trials={} psi={}", sc.h0_trial_count(), psi_label(sc.psi)));
    for a in &sc.attackers {
        let p = sc.profile(&a.spec)?;
        writeln!(
            out,
            "# attacker {} theta_deg={} phi_deg={} power_mw={} lambda_sq={} distance_m={}",
            a.name,
            tidy(a.spec.theta.to_degrees()),
            tidy(a.spec.phi.to_degrees()),
            p.power_mw(),
            p.lambda_sq(),
            p.distance_m()
        )
        .unwrap();
    }
    if empirical {
        out.push_str("attacker,tau,far_analytic,far_empirical,sdr_analytic,sdr_empirical\n");
    } else {
        out.push_str("attacker,tau,far_analytic,sdr_analytic\n");
    }
    for r in rows {
        if empirical {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.attacker,
                r.tau,
                r.far_analytic,
                opt(r.far_empirical),
                opt(r.sdr_analytic),
                opt(r.sdr_empirical)
            )
        } else {
            writeln!(out, "{},{},{},{}", r.attacker, r.tau, r.far_analytic, opt(r.sdr_analytic))
        }
        .unwrap();
    }
    Ok(out)
}

/// One sweep point at one target false-alarm rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// In the variable's display unit.
    pub value: f64,
    pub eta: f64,
    pub tau: f64,
    pub sdr_empirical: f64,
    pub sdr_std_err: f64,
    pub sdr_analytic: Option<f64>,
}

/// SDR at `far_threshold(eta)` along the sweep of `var`.
pub fn sweep_rows(sc: &Scenario, var: SweepVar) -> Result<Vec<SweepRow>> {
    let model = sc.far_model()?;
    let taus = sc
        .etas
        .iter()
        .map(|&e| far_threshold(e, &model))
        .collect::<Result<Vec<_>>>()?;
    let grid = DirectionGrid::new(sc.geom, sc.grid()?);
    let mut rows = vec![];
    for value in sc.sweep.values(var) {
        let ma = var.apply(&sc.ma, value);
        let stats = SortedStatistics::new(trial_statistics_on(&h1_config(sc, &ma, sc.trials)?, &grid)?);
        for (&eta, &tau) in sc.etas.iter().zip(&taus) {
            let r = stats.exceedance(tau);
            rows.push(SweepRow {
                value,
                eta,
                tau,
                sdr_empirical: r.rate,
                sdr_std_err: r.std_err,
                sdr_analytic: analytic_sdr(sc, &ma, tau)?,
            });
        }
    }
    Ok(rows)
}

/// CSV: `<var>,eta,tau,sdr_empirical,sdr_std_err,sdr_analytic`.
pub fn cmd_sweep(sc: &Scenario, var: Option<SweepVar>) -> Result<String> {
    let var = var
        .or(sc.sweep.var)
        .ok_or_else(|| Error::Usage("no sweep variable given (theta1, phi1, lambda1_sq, p1)".into()))?;
    let rows = sweep_rows(sc, var)?;
    let mut out = metadata(
        "sweep",
        sc,
        &format!("var={} unit={} psi={}", var.name(), var.unit(), psi_label(sc.psi)),
    );
    writeln!(out, "{},eta,tau,sdr_empirical,sdr_std_err,sdr_analytic", var.name()).unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.value,
            r.eta,
            r.tau,
            r.sdr_empirical,
            r.sdr_std_err,
            opt(r.sdr_analytic)
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrueParameters {
    pub dir: DirectionCosines,
    pub x_sq: f64,
    pub lambda_sq: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateDemo {
    pub seed: u64,
    pub grid_step: f64,
    pub truth: TrueParameters,
    pub estimate: EstimateSet,
    pub direction_error: f64,
    pub nll_at_truth: f64,
    pub nll_at_estimate: f64,
    pub statistic: f64,
}

/// Estimate the attacker parameters from one seeded H1 packet.
pub fn estimate_demo(sc: &Scenario) -> Result<EstimateDemo> {
    let gcs = sc.gcs_knowledge()?;
    let ma = sc.profile(&sc.ma)?;
    let noise = sc.noise()?;
    let seed = derive_seed(sc.seed, DEMO_TAG);
    let mut rng = trial_rng(seed, 0);
    let psi = match sc.psi {
        PhaseSpec::Fixed(p) => p,
        PhaseSpec::Uniform => rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU,
    };
    let y = transmit(Hypothesis::H1, &ma, psi, &noise, &sc.geom, &mut rng)?;
    let grid = DirectionGrid::new(sc.geom, sc.grid()?);
    let estimate = estimate_all(&y, &grid)?;
    let consts = link_constants(&ma, sc.sigma_sq)?;
    let truth = TrueParameters {
        dir: ma.direction(),
        x_sq: consts.x_amp * consts.x_amp,
        lambda_sq: ma.lambda_sq(),
        psi,
    };
    let direction_error = (estimate.dir_hat.omega() - truth.dir.omega())
        .abs()
        .max((estimate.dir_hat.mu() - truth.dir.mu()).abs());
    Ok(EstimateDemo {
        seed: sc.seed,
        grid_step: sc.grid_step,
        nll_at_truth: nll_objective(&y, consts.x_amp, ma.lambda_sq().sqrt(), truth.dir, psi, &sc.geom)?,
        nll_at_estimate: nll_at_estimates(&y, &estimate, &sc.geom)?,
        statistic: glr_statistic_detailed(&y, &gcs, &grid)?.statistic,
        truth,
        estimate,
        direction_error,
    })
}

pub fn cmd_estimate_demo(sc: &Scenario) -> Result<String> {
    let demo = estimate_demo(sc)?;
    let mut s = serde_json::to_string_pretty(&demo).map_err(|e| Error::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
