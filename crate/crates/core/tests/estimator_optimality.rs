//! The closed-form estimates minimize the per-element likelihood objective.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavauth::array::{steering_unit, ArrayGeometry, DirectionCosines, TerminalProfile};
use uavauth::estimator::{
    estimate_all, estimate_from_peak, nll_at_estimates, nll_objective, DirectionGrid, GridPeak, GridSpec,
};
use uavauth::signal::{transmit, Hypothesis, NoiseParams, ReceivedVector};
use uavauth::Complex64;

fn packets(n: usize, seed: u64) -> Vec<ReceivedVector> {
    let geom = ArrayGeometry::t_shaped_25();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let dir = DirectionCosines::new(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)).unwrap();
            let p = TerminalProfile::new(
                rng.random_range(1.0..300.0),
                rng.random_range(10.0..60.0),
                rng.random_range(0.0..=1.0),
                dir,
                2.0,
            )
            .unwrap();
            let sigma_sq = 10f64.powf(rng.random_range(-4.0..-1.0));
            let noise = NoiseParams::new(sigma_sq).unwrap();
            let psi = rng.random_range(0.0..TAU);
            transmit(Hypothesis::H1, &p, psi, &noise, &geom, &mut rng).unwrap()
        })
        .collect()
}

#[test]
fn perturbing_amplitude_phase_or_los_fraction_never_helps() {
    let geom = ArrayGeometry::t_shaped_25();
    let grid = DirectionGrid::new(geom.clone(), GridSpec::new(0.02).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for y in packets(60, 10) {
        let est = estimate_all(&y, &grid).unwrap();
        assert!(!est.low_confidence);
        let best = nll_at_estimates(&y, &est, &geom).unwrap();
        let (x, lam) = (est.x_sq_hat.sqrt(), est.lambda_sq_hat.sqrt());
        for _ in 0..200 {
            let scale = 10f64.powf(rng.random_range(-4.0..-0.5));
            let xp = (x * (1.0 + scale * rng.random_range(-1.0..1.0))).max(0.0);
            let lp = (lam + scale * rng.random_range(-1.0..1.0)).clamp(0.0, 1.0);
            let pp = est.psi_hat + scale * rng.random_range(-1.0..1.0);
            let v = nll_objective(&y, xp, lp, est.dir_hat, pp, &geom).unwrap();
            assert!(v >= best - 1e-12 * best.abs().max(1.0), "perturbed {v} < {best}");
        }
    }
}

#[test]
fn no_other_grid_direction_does_better() {
    let geom = ArrayGeometry::t_shaped_25();
    let grid = DirectionGrid::new(geom.clone(), GridSpec::new(0.05).unwrap());
    for y in packets(8, 20) {
        let est = estimate_all(&y, &grid).unwrap();
        let best = nll_at_estimates(&y, &est, &geom).unwrap();
        for &w in grid.points() {
            for &m in grid.points() {
                let dir = DirectionCosines::new(w, m).unwrap();
                let a = steering_unit(&geom, dir);
                let corr: Complex64 = y.y_bar.iter().zip(&a).map(|(y, a)| y.conj() * a).sum();
                let peak = GridPeak {
                    dir,
                    peak: corr.norm_sqr(),
                    correlation: corr,
                };
                let other = estimate_from_peak(&y, &peak);
                let v = nll_at_estimates(&y, &other, &geom).unwrap();
                assert!(v >= best - 1e-10 * best.abs().max(1.0), "({w}, {m}) gives {v} < {best}");
            }
        }
    }
}

#[test]
fn near_noiseless_los_on_grid_is_recovered() {
    let geom = ArrayGeometry::t_shaped_25();
    let grid = DirectionGrid::new(geom.clone(), GridSpec::new(0.05).unwrap());
    let dir = DirectionCosines::new(0.2, -0.35).unwrap();
    let p = TerminalProfile::new(100.0, 50.0, 1.0, dir, 2.0).unwrap();
    let noise = NoiseParams::new(1e-10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..20 {
        let psi = rng.random_range(0.0..TAU);
        let y = transmit(Hypothesis::H1, &p, psi, &noise, &geom, &mut rng).unwrap();
        let est = estimate_all(&y, &grid).unwrap();
        assert!((est.dir_hat.omega() - 0.2).abs() < 1e-12);
        assert!((est.dir_hat.mu() + 0.35).abs() < 1e-12);
        // exactly 1 on the xi* < 0 branch, 1 - O(sigma^2 / x^2) otherwise
        assert!(est.lambda_sq_hat > 1.0 - 1e-6);
        assert!((est.x_sq_hat / 0.04 - 1.0).abs() < 1e-3);
        let dpsi = (est.psi_hat - psi).rem_euclid(TAU);
        assert!(dpsi.min(TAU - dpsi) < 1e-3);
    }
}
