//! Path-simulation laws that have exact or closed-form references.

use driftlab::drift::Sign;
use driftlab::sde::{simulate, wilson_interval, SdeConfig};

fn base_config() -> SdeConfig {
    SdeConfig {
        dimension: 3,
        delta: 1.0,
        sign: Sign::Plus,
        x0: [0.8, 0.0, 0.0],
        dt: 1e-3,
        t_final: 1e-3,
        paths: 64,
        eps_reg: 0.05,
        eps_hit: 0.0,
        far_box: 100.0,
        seed: 99,
    }
}

#[test]
fn fixed_seed_runs_are_bitwise_identical() {
    let mut cfg = base_config();
    cfg.t_final = 0.05;
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a.endpoints, b.endpoints);
    assert_eq!(a.hit, b.hit);
    cfg.seed = 100;
    let c = simulate(&cfg).unwrap();
    assert_ne!(a.endpoints, c.endpoints);
}

#[test]
fn one_step_drift_difference_scales_with_sqrt_delta() {
    // single step, no absorption: the noise is seed-determined and cancels
    // in the difference, leaving (sqrt(4)-sqrt(1))/2 * dt * x0/|x0|^2 exactly
    let cfg1 = base_config();
    let mut cfg4 = base_config();
    cfg4.delta = 4.0;
    let run1 = simulate(&cfg1).unwrap();
    let run4 = simulate(&cfg4).unwrap();
    let r2 = 0.8f64 * 0.8;
    let expected_mag = 0.5 * 1e-3 * 0.8 / r2;
    for (e1, e4) in run1.endpoints.iter().zip(&run4.endpoints) {
        let diff = [e4[0] - e1[0], e4[1] - e1[1], e4[2] - e1[2]];
        assert!(diff[1].abs() <= 1e-15 && diff[2].abs() <= 1e-15, "difference left the x0 axis");
        assert!(
            (diff[0].abs() - expected_mag).abs() <= 1e-14,
            "drift increment {} vs expected {expected_mag}",
            diff[0].abs()
        );
    }
}

#[test]
fn wilson_interval_properties() {
    let m = 500;
    let (p0, lo0, hi0) = wilson_interval(0, m);
    assert_eq!(p0, 0.0);
    assert_eq!(lo0, 0.0);
    assert!(hi0 > 0.0 && hi0 < 0.02);
    let (p1, lo1, hi1) = wilson_interval(m, m);
    assert_eq!(p1, 1.0);
    assert_eq!(hi1, 1.0);
    assert!(lo1 < 1.0 && lo1 > 0.98);
    let mut prev = (0.0, 0.0);
    for k in [50, 100, 250, 400] {
        let (p, lo, hi) = wilson_interval(k, m);
        assert!(lo < p && p < hi, "estimate outside its own interval");
        assert!(lo > prev.0 && hi > prev.1, "interval not monotone in k");
        prev = (lo, hi);
    }
}

#[test]
fn brownian_baseline_matches_capacity_ratio() {
    // pure Brownian motion from |x0| = 1 hits the eps-ball with
    // probability eps/|x0|; budget covers CI + horizon truncation
    let cfg = SdeConfig {
        dimension: 3,
        delta: 0.0,
        sign: Sign::Plus,
        x0: [1.0, 0.0, 0.0],
        dt: 1e-3,
        t_final: 50.0,
        paths: 4000,
        eps_reg: 0.05,
        eps_hit: 0.2,
        far_box: 100.0,
        seed: 31,
    };
    let run = simulate(&cfg).unwrap();
    let p_hat = run.hit_count() as f64 / cfg.paths as f64;
    assert!(
        (p_hat - 0.2).abs() <= 0.03,
        "baseline hit probability {p_hat} vs 0.2"
    );
}

#[test]
fn attracting_drift_hits_more_often_than_repulsive() {
    let mut cfg = SdeConfig {
        dimension: 3,
        delta: 16.0,
        sign: Sign::Plus,
        x0: [0.6, 0.0, 0.0],
        dt: 2e-4,
        t_final: 20.0,
        paths: 3000,
        eps_reg: 0.05,
        eps_hit: 0.15,
        far_box: 50.0,
        seed: 7,
    };
    let attracting = simulate(&cfg).unwrap();
    cfg.sign = Sign::Minus;
    let repulsive = simulate(&cfg).unwrap();
    let pa = attracting.hit_count() as f64 / cfg.paths as f64;
    let pr = repulsive.hit_count() as f64 / cfg.paths as f64;
    assert!(
        pa > pr + 0.3,
        "attracting {pa} not clearly above repulsive {pr}"
    );
}

#[test]
fn step_size_invariant_is_enforced() {
    let mut cfg = base_config();
    cfg.delta = 36.0;
    cfg.dt = 1.0;
    cfg.eps_reg = 0.01;
    assert!(cfg.validate().is_err());
}
