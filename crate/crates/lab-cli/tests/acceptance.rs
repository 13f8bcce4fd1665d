//! Release acceptance: one test per criterion, each at its pinned tolerance.
//! Every test prints a single `criterion N: PASS/FAIL` line before asserting,
//! so `cargo test --test acceptance -- --nocapture` yields a full scoreboard
//! even when a criterion is red.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use driftlab::degiorgi::{iterate_z, z_star};
use driftlab::drift::{DriftSpec, Sign};
use driftlab::form_bound::{rayleigh_delta, verify_form_bound, TestFunctionFamily};
use driftlab::grid::{Grid, GridScalarField, GridVectorField};
use driftlab::mollify::mollify_spec;
use driftlab::orlicz::{embedding_check, gauge_norm, orlicz_modular};
use driftlab::rng::StreamRng;
use driftlab::sde::{feller_crosscheck, hitting_scan, simulate, wilson_interval, SdeConfig};
use driftlab::solver::{
    evolve, orlicz_energy_certificate, semigroup_cauchy, smoothing_slope, solve_resolvent,
    trotter_conditions, DriftMeta, EvolutionConfig,
};
use tempfile::tempdir;

fn gaussian(grid: Grid, width: f64) -> GridScalarField {
    GridScalarField::from_fn(grid, move |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (-r2 / (2.0 * width * width)).exp()
    })
}

fn hardy_sample(grid: &Grid) -> GridVectorField {
    let spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    spec.sample(grid, grid.spacing() / 2.0)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Criterion 1: the discrete critical quotient of the Hardy field converges
/// upward over N in {32, 48, 64} and lands within 20% of 1; a declared
/// (delta, c) = (1, 0) survives verification on all three probe families
/// while (0.5, 0) is rejected by the near-optimizer family.
#[test]
fn criterion_01_hardy_quotient_and_bound_verification() {
    let mut est = Vec::new();
    for n in [32usize, 48, 64] {
        let grid = Grid::new(3, 1.0, n).unwrap();
        let b = hardy_sample(&grid);
        est.push(rayleigh_delta(&b, 0.0, &grid).unwrap().delta_est);
    }
    let upward = est.windows(2).all(|w| w[1] > w[0]);
    let d64 = est[2];
    let within = (d64 - 1.0).abs() <= 0.2;

    let grid64 = Grid::new(3, 1.0, 64).unwrap();
    let b64 = hardy_sample(&grid64);
    let fams = [
        TestFunctionFamily::gaussians(),
        TestFunctionFamily::radial_bumps(),
        TestFunctionFamily::hardy_optimizers(),
    ];
    let declared_ok = fams
        .iter()
        .map(|f| verify_form_bound(&b64, 1.0, 0.0, f).unwrap().pass)
        .all(|p| p);

    // The discrete quotient is exactly invariant under box rescaling at fixed
    // N, so the under-declared (0.5, 0) cannot be exposed on a 64^3 grid by
    // any choice of h; the optimizer ratio first crosses 1/2 near N = 128.
    let grid128 = Grid::new(3, 1.0, 128).unwrap();
    let b128 = hardy_sample(&grid128);
    let under =
        verify_form_bound(&b128, 0.5, 0.0, &TestFunctionFamily::hardy_optimizers()).unwrap();

    let pass = upward && within && declared_ok && !under.pass;
    println!(
        "criterion 1: {} - delta_est = {:.4}/{:.4}/{:.4} at 32/48/64 (upward: {}), \
         |d64 - 1| = {:.3} vs 0.2 ({}), declared (1,0) verified: {}, declared (0.5,0) \
         rejected at 128^3: {} (worst ratio {:.4}); the quotient approaches 1 only \
         logarithmically in N, so 64^3 sits well short of the 20% band",
        verdict(pass),
        est[0],
        est[1],
        est[2],
        upward,
        (d64 - 1.0).abs(),
        if within { "ok" } else { "out of band" },
        declared_ok,
        !under.pass,
        under.worst_ratio,
    );
    assert!(upward, "quotient failed to increase with N: {est:?}");
    assert!(declared_ok, "declared (1, 0) failed verification at 64^3");
    assert!(
        !under.pass,
        "declared (0.5, 0) passed at 128^3 with worst ratio {}",
        under.worst_ratio
    );
    assert!(
        within,
        "64^3 estimate {d64:.4} is not within 20% of 1; the discrete optimizer needs \
         |x|^(-1/2) structure over many dyadic shells and 64 points per axis resolve \
         too few of them (log-slow convergence), so this clause cannot hold at the \
         stated resolutions"
    );
}

/// Criterion 2: the mollified Hardy semigroup at delta = 1 never expands the
/// L^p norm beyond 1% for p in {3, 4} up to t = 0.05.
#[test]
fn criterion_02_lp_quasi_contraction() {
    let grid = Grid::new(3, 1.0, 32).unwrap();
    let spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    let b = mollify_spec(&spec, 0.15, &grid).unwrap();
    let f0 = gaussian(grid, 0.25);
    let config = EvolutionConfig {
        tau: 1e-3,
        t_final: 0.05,
        lin_tol: 1e-8,
        snapshot_stride: 0,
        track_ps: vec![3.0, 4.0],
        gauge_stride: 0,
    };
    let run = evolve(&b, &f0, &config, DriftMeta::free()).unwrap();
    let mut worst = [0.0f64; 2];
    for k in 0..2 {
        let base = run.lp_history[k][0];
        worst[k] = run.lp_history[k]
            .iter()
            .map(|v| v / base)
            .fold(0.0, f64::max);
    }
    let pass = worst.iter().all(|&w| w <= 1.01);
    println!(
        "criterion 2: {} - sup_t ||u||_p / ||f||_p = {:.6} (p=3), {:.6} (p=4), bound 1.01",
        verdict(pass),
        worst[0],
        worst[1]
    );
    assert!(pass, "L^p growth factors {worst:?} exceed 1.01");
}

/// Criterion 3: the fitted 1 -> infinity smoothing exponent matches -d/2,
/// within 10% for the drift-free semigroup and within 20% for Hardy delta = 1.
#[test]
fn criterion_03_ultracontractive_decay_exponent() {
    let grid = Grid::new(3, 1.0, 64).unwrap();
    let f0 = gaussian(grid, 0.04);
    let config = EvolutionConfig {
        tau: 2.5e-4,
        t_final: 0.05,
        lin_tol: 1e-8,
        snapshot_stride: 0,
        track_ps: vec![1.0],
        gauge_stride: 0,
    };
    let window = (0.01, 0.05);

    let free_run = evolve(
        &GridVectorField::zeros(grid),
        &f0,
        &config,
        DriftMeta::free(),
    )
    .unwrap();
    let free_fit = smoothing_slope(&free_run, 1.0, f64::INFINITY, window).unwrap();

    let b = hardy_sample(&grid);
    let hardy_run = evolve(&b, &f0, &config, DriftMeta::free()).unwrap();
    let hardy_fit = smoothing_slope(&hardy_run, 1.0, f64::INFINITY, window).unwrap();

    let target = free_fit.expected;
    let free_ok = (free_fit.slope - target).abs() <= 0.10 * target.abs();
    let hardy_ok = (hardy_fit.slope - target).abs() <= 0.20 * target.abs();
    let pass = free_ok && hardy_ok;
    println!(
        "criterion 3: {} - slope(free) = {:.4} vs {:.1} within 10%: {}, \
         slope(hardy) = {:.4} within 20%: {} ({} fit points)",
        verdict(pass),
        free_fit.slope,
        target,
        free_ok,
        hardy_fit.slope,
        hardy_ok,
        free_fit.points
    );
    assert!(
        free_ok,
        "drift-free slope {:.4} deviates from {target} by more than 10%",
        free_fit.slope
    );
    assert!(
        hardy_ok,
        "hardy slope {:.4} deviates from {target} by more than 20%",
        hardy_fit.slope
    );
}

/// Criterion 4: the gauge of a unit-measure indicator equals 1/arccosh(2) to
/// 1e-6, the modular at the gauge stays at 1 + 1e-6 or below, and the moment
/// embedding holds for m = 1..4 on 50 random fields.
#[test]
fn criterion_04_orlicz_gauge_and_embedding() {
    let grid = Grid::new(3, 2.0, 17).unwrap();
    // 4^3 node block: h = 1/4 exactly, so the measure is 64 h^3 = 1
    let mut ind = GridScalarField::zeros(grid);
    for i in 6..10 {
        for j in 6..10 {
            for k in 6..10 {
                ind.values[grid.index(i, j, k)] = 1.0;
            }
        }
    }
    let target = 1.0 / 2.0f64.acosh();
    let g = gauge_norm(&ind).unwrap();
    let gauge_err = (g.value - target).abs();
    let modular = orlicz_modular(&ind, g.value).unwrap();

    let mut all_embed = true;
    let mut rows_checked = 0usize;
    for field in 0..50u64 {
        let mut rng = StreamRng::new(4001, field);
        let amp = 10f64.powf(rng.uniform_in(-1.0, 1.0));
        let mut f = GridScalarField::zeros(grid);
        for v in f.values.iter_mut() {
            *v = amp * rng.uniform_in(-1.0, 1.0);
        }
        let rows = embedding_check(&f, 4).unwrap();
        rows_checked += rows.len();
        all_embed &= rows.iter().all(|r| r.pass);
    }

    let pass = gauge_err <= 1e-6 && modular <= 1.0 + 1e-6 && all_embed;
    println!(
        "criterion 4: {} - |gauge - 1/arccosh 2| = {:.2e} (<= 1e-6), modular at gauge \
         = {:.9} (<= 1 + 1e-6), {} embedding rows over 50 random fields all pass: {}",
        verdict(pass),
        gauge_err,
        modular,
        rows_checked,
        all_embed
    );
    assert!(gauge_err <= 1e-6, "gauge {} vs {target}", g.value);
    assert!(modular <= 1.0 + 1e-6, "modular at gauge = {modular}");
    assert!(all_embed, "an embedding row failed");
}

/// Criterion 5: the three energy certificates hold with slack at most 5e-2
/// for the mollified compactly supported field at delta = 4 with estimated
/// c(4), and the slack does not grow when h and tau are halved.
#[test]
fn criterion_05_energy_certificates_under_refinement() {
    let spec = DriftSpec::compact_hardy(3, 4.0, 1.0).unwrap();
    let eps = 0.3;
    let coarse = Grid::new(3, 1.5, 48).unwrap();
    let fine = Grid::new(3, 1.5, 95).unwrap(); // spacing exactly halves

    // c(4) estimate: smallest lambda with quotient <= 4 scaled by 4; the
    // discrete quotient already sits below 4 at lambda = 0, so c(4) = 0
    let raw = spec.sample(&coarse, coarse.spacing() / 2.0);
    let rho = rayleigh_delta(&raw, 0.0, &coarse).unwrap().delta_est;
    assert!(rho < 4.0, "discrete quotient {rho} is not below delta = 4");
    let meta = DriftMeta::compact(3, 4.0, 0.0, 1.0 + eps, 0.25).unwrap();

    let mut certs = Vec::new();
    for (grid, tau, stride) in [(coarse, 1e-3, 5usize), (fine, 5e-4, 10usize)] {
        let b = mollify_spec(&spec, eps, &grid).unwrap();
        let f0 = gaussian(grid, 0.35);
        let config = EvolutionConfig {
            tau,
            t_final: 0.02,
            lin_tol: 1e-8,
            snapshot_stride: stride,
            track_ps: vec![2.0],
            gauge_stride: stride,
        };
        let run = evolve(&b, &f0, &config, meta).unwrap();
        certs.push(orlicz_energy_certificate(&run, 5e-2).unwrap());
    }
    let shrinks = certs[1].sup_slack <= certs[0].sup_slack;
    let pass = certs.iter().all(|c| c.pass) && shrinks;
    println!(
        "criterion 5: {} - sup slack {:.3e} at 48^3, {:.3e} after (h, tau) halving \
         (bound 5e-2, both certificates pass: {}, refinement does not grow slack: {})",
        verdict(pass),
        certs[0].sup_slack,
        certs[1].sup_slack,
        certs.iter().all(|c| c.pass),
        shrinks
    );
    assert!(certs[0].pass, "coarse slack {} > 5e-2", certs[0].sup_slack);
    assert!(certs[1].pass, "fine slack {} > 5e-2", certs[1].sup_slack);
    assert!(
        shrinks,
        "slack grew under refinement: {} -> {}",
        certs[0].sup_slack, certs[1].sup_slack
    );
}

/// Criterion 6: across four mollification levels the pairwise Orlicz sup
/// differences and gradient-difference integrals decay monotonically, the
/// gradient table by at least 2x per halving of epsilon.
#[test]
fn criterion_06_mollification_cauchy_rates() {
    let grid = Grid::new(3, 0.75, 61).unwrap(); // h = 0.025, smallest eps = 2h
    let spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    let f0 = gaussian(grid, 0.2);
    let report = semigroup_cauchy(
        &spec,
        &grid,
        &[0.4, 0.2, 0.1, 0.05],
        &f0,
        5e-4,
        0.02,
        1e-8,
        DriftMeta::free(),
        5,
    )
    .unwrap();
    let ratios_ok = report.grad_ratios.iter().all(|&r| r >= 2.0);
    let pass = report.pass_gauge_monotone && report.pass_grad_monotone && ratios_ok;
    println!(
        "criterion 6: {} - gauge diffs by level {:?} monotone: {}, grad integrals {:?} \
         monotone: {}, per-halving ratios {:?} all >= 2: {}",
        verdict(pass),
        report.gauge_by_level,
        report.pass_gauge_monotone,
        report.grad_by_level,
        report.pass_grad_monotone,
        report.grad_ratios,
        ratios_ok
    );
    assert!(report.pass_gauge_monotone, "gauge differences not monotone");
    assert!(report.pass_grad_monotone, "gradient integrals not monotone");
    assert!(ratios_ok, "gradient ratios {:?} below 2", report.grad_ratios);
}

/// Criterion 7: scaled resolvents are exact sup-norm contractions, the
/// strong-convergence defect decreases strictly in mu at every approximation
/// level, and pairwise resolvent differences on the compact shrink with n.
#[test]
fn criterion_07_resolvent_convergence_conditions() {
    let grid = Grid::new(3, 1.0, 25).unwrap();
    let spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    let g = gaussian(grid, 0.35);
    let epsilons = [0.5, 0.35, 0.2];
    let mus = [10.0, 100.0, 1000.0];
    let report = trotter_conditions(&spec, &grid, &epsilons, &g, &mus, 0.5, 1e-9).unwrap();

    let contraction_exact = report
        .condition1
        .iter()
        .flatten()
        .all(|&v| v <= 1.0);
    // defect decrease per level, not just for the sup over levels
    let mut per_level_strict = true;
    for &eps in &epsilons {
        let b = mollify_spec(&spec, eps, &grid).unwrap();
        let mut defects = Vec::new();
        for &mu in &mus {
            let (u, _) = solve_resolvent(&b, mu, &g, 1e-9).unwrap();
            let dev = u
                .values
                .iter()
                .zip(&g.values)
                .map(|(ui, gi)| (mu * ui - gi).abs())
                .fold(0.0, f64::max);
            defects.push(dev);
        }
        per_level_strict &= defects.windows(2).all(|w| w[1] < w[0]);
    }
    let sup_strict = report.condition3.windows(2).all(|w| w[1] < w[0]);
    let compact_shrinks = report.condition2.windows(2).all(|w| w[1] < w[0]);

    let pass = report.pass_condition1
        && contraction_exact
        && sup_strict
        && per_level_strict
        && compact_shrinks;
    println!(
        "criterion 7: {} - contraction exact: {} (worst {:.6}), condition 3 {:?} strictly \
         decreasing in mu: {} (uniformly per level: {}), compact sup differences {:?} \
         shrink with n: {}",
        verdict(pass),
        contraction_exact,
        report
            .condition1
            .iter()
            .flatten()
            .fold(0.0f64, |a, &v| a.max(v)),
        report.condition3,
        sup_strict,
        per_level_strict,
        report.condition2,
        compact_shrinks
    );
    assert!(report.pass_condition1 && contraction_exact, "contraction violated");
    assert!(sup_strict, "condition 3 not strictly decreasing: {:?}", report.condition3);
    assert!(per_level_strict, "a level's defect is not strictly decreasing in mu");
    assert!(compact_shrinks, "compact differences not shrinking: {:?}", report.condition2);
}

/// Criterion 8: the iteration at (N, C0, alpha) = (1, 2, 1) started at the
/// critical mass 1/2 follows z_m = 2^{-(m+1)} exactly in binary arithmetic,
/// and 1000 random subcritical starts all converge below 1e-12 in 200 steps.
#[test]
fn criterion_08_critical_mass_iteration() {
    let zs = z_star(1.0, 2.0, 1.0).unwrap();
    let exact = zs == 0.5;
    let run = iterate_z(1.0, 2.0, 1.0, 0.5, 60).unwrap();
    let orbit_exact = run
        .orbit
        .iter()
        .enumerate()
        .all(|(m, &z)| z == 2.0f64.powi(-(m as i32 + 1)))
        && !run.diverged;

    let mut rng = StreamRng::new(8001, 0);
    let mut all_converged = true;
    for _ in 0..1000 {
        let n_const = rng.uniform_in(0.5, 5.0);
        let c0 = rng.uniform_in(1.5, 8.0);
        let alpha = rng.uniform_in(0.1, 1.0);
        let z0 = rng.uniform() * z_star(n_const, c0, alpha).unwrap();
        let it = iterate_z(n_const, c0, alpha, z0, 200).unwrap();
        all_converged &=
            it.converged && it.orbit.last().copied().unwrap_or(f64::MAX) <= 1e-12;
    }

    let pass = exact && orbit_exact && all_converged;
    println!(
        "criterion 8: {} - z* = 1/2 exact: {}, orbit equals 2^-(m+1) for 60 steps: {}, \
         1000 subcritical draws converge below 1e-12 within 200 steps: {}",
        verdict(pass),
        exact,
        orbit_exact,
        all_converged
    );
    assert!(exact, "z_star(1, 2, 1) = {zs}");
    assert!(orbit_exact, "threshold orbit deviates from 2^-(m+1)");
    assert!(all_converged, "a subcritical start failed to converge");
}

/// Criterion 9: hitting probability rises through the solvability threshold
/// with p(64) - p(1) > 0.2, the delta = 0 control matches the Brownian value
/// eps/r within its interval, and Monte Carlo endpoint expectations agree
/// with the reference solution at five probes.
#[test]
fn criterion_09_hitting_scan_and_feller_crosscheck() {
    let base = SdeConfig {
        dimension: 3,
        delta: 1.0,
        sign: Sign::Plus,
        x0: [0.5, 0.0, 0.0],
        dt: 5e-4,
        t_final: 40.0,
        paths: 100_000,
        eps_reg: 0.08,
        eps_hit: 0.15,
        far_box: 1e4,
        seed: 9001,
    };
    let scan = hitting_scan(&base, &[1.0, 16.0, 36.0, 64.0]).unwrap();
    let spread = scan.rows.last().unwrap().p_hat - scan.rows[0].p_hat;
    let scan_ok = scan.monotone_within_ci && spread > 0.2;

    // Brownian control: hitting probability of B_eps from |x| = r is eps/r
    let control = SdeConfig {
        dimension: 3,
        delta: 0.0,
        sign: Sign::Plus,
        x0: [1.0, 0.0, 0.0],
        dt: 1e-3,
        t_final: 2500.0,
        paths: 100_000,
        eps_reg: 0.05,
        eps_hit: 0.1,
        far_box: 1e4,
        seed: 9002,
    };
    let ens = simulate(&control).unwrap();
    let (p_hat, lo, hi) = wilson_interval(ens.hit_count(), control.paths);
    let control_ok = lo <= 0.1 && 0.1 <= hi;

    // endpoint expectation against the mollified compact reference solution
    let grid = Grid::new(3, 1.2, 32).unwrap();
    let pde_spec = DriftSpec::compact_hardy(3, 1.0, 1.0).unwrap();
    let b = mollify_spec(&pde_spec, 0.16, &grid).unwrap();
    fn payoff(x: [f64; 3]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (-r2 / (2.0 * 0.35 * 0.35)).exp()
    }
    let f0 = GridScalarField::from_fn(grid, payoff);
    let config = EvolutionConfig {
        tau: 1.25e-3,
        t_final: 0.05,
        lin_tol: 1e-9,
        snapshot_stride: 0,
        track_ps: vec![],
        gauge_stride: 0,
    };
    let run = evolve(&b, &f0, &config, DriftMeta::free()).unwrap();
    let final_u = &run.snapshots.last().unwrap().1;
    let probes = [
        [0.3, 0.0, 0.0],
        [0.0, 0.5, 0.2],
        [-0.4, 0.1, 0.0],
        [0.2, -0.3, 0.4],
        [0.0, 0.0, -0.6],
    ];
    let pde_vals: Vec<f64> = probes.iter().map(|&x| final_u.interpolate(x)).collect();
    let mc = SdeConfig {
        dimension: 3,
        delta: 1.0,
        sign: Sign::Plus,
        x0: [0.0; 3],
        dt: 2e-4,
        t_final: 0.05,
        paths: 20_000,
        eps_reg: 0.05,
        eps_hit: 0.0,
        far_box: 50.0,
        seed: 9100,
    };
    let mc_spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    let rows = feller_crosscheck(&mc, &mc_spec, &probes, payoff, &pde_vals, 0.02).unwrap();
    let cross_ok = rows.iter().all(|r| r.pass);
    let worst_gap = rows
        .iter()
        .map(|r| (r.mc_mean - r.pde_value).abs())
        .fold(0.0, f64::max);

    let pass = scan_ok && control_ok && cross_ok;
    println!(
        "criterion 9: {} - p by delta {:?} monotone within CI: {}, p(64) - p(1) = {:.3} \
         (> 0.2), control p = {:.4} with CI [{:.4}, {:.4}] containing 0.1: {}, crosscheck \
         worst |MC - PDE| = {:.4} within 3 SE + 0.02 at all 5 probes: {}",
        verdict(pass),
        scan.rows.iter().map(|r| r.p_hat).collect::<Vec<_>>(),
        scan.monotone_within_ci,
        spread,
        p_hat,
        lo,
        hi,
        control_ok,
        worst_gap,
        cross_ok
    );
    assert!(scan_ok, "hitting scan failed: spread {spread}");
    assert!(control_ok, "control CI [{lo}, {hi}] misses 0.1");
    assert!(cross_ok, "a crosscheck probe failed: {rows:?}");
}

fn run_lab(manifest: &Path, out_dir: &Path, extra: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .arg("run")
        .arg(manifest)
        .arg("--out-dir")
        .arg(out_dir)
        .args(extra)
        .env_remove("LAB_THREADS")
        .output()
        .expect("failed to launch lab");
    assert!(
        out.status.code() == Some(0),
        "lab run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn dir_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut map = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                map.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    map
}

/// Criterion 10: fixed-seed runs are byte-identical (the path ensembles also
/// across thread counts), and no maximum-principle or positivity violation
/// exceeds 1e-12 in relative terms.
#[test]
fn criterion_10_determinism_and_positivity() {
    let dir = tempdir().unwrap();
    let orlicz = dir.path().join("orlicz.json");
    fs::write(
        &orlicz,
        r#"{
  "kind": "orlicz",
  "seed": 11,
  "experiments": [
    {"label": "gauge", "grid": {"points": 17, "half_width": 2.0},
     "random_fields": 3, "max_m": 3, "indicator_check": true}
  ]
}"#,
    )
    .unwrap();
    let sde = dir.path().join("sde.json");
    fs::write(
        &sde,
        r#"{
  "kind": "sde-scan",
  "seed": 17,
  "experiments": [
    {"label": "hit", "base": {
       "dimension": 3, "delta": 1.0, "sign": "+",
       "x0": [0.5, 0.0, 0.0], "dt": 0.001, "t_final": 10.0,
       "paths": 4000, "eps_reg": 0.08, "eps_hit": 0.15,
       "far_box": 10000.0, "seed": 0},
     "deltas": [1.0, 36.0]}
  ]
}"#,
    )
    .unwrap();

    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_lab(&orlicz, &a, &[]);
    run_lab(&orlicz, &b, &[]);
    let identical_orlicz = dir_bytes(&a) == dir_bytes(&b);

    let (sa, sb) = (dir.path().join("sa"), dir.path().join("sb"));
    run_lab(&sde, &sa, &["--threads", "2"]);
    run_lab(&sde, &sb, &["--threads", "4"]);
    let identical_sde = dir_bytes(&sa) == dir_bytes(&sb);

    // extremum and positivity floors on the PDE side
    let grid = Grid::new(3, 1.0, 24).unwrap();
    let spec = DriftSpec::hardy(3, 1.0, Sign::Plus).unwrap();
    let bfield = mollify_spec(&spec, 0.2, &grid).unwrap();
    let f0 = gaussian(grid, 0.25);
    let config = EvolutionConfig {
        tau: 1e-3,
        t_final: 0.02,
        lin_tol: 1e-10,
        snapshot_stride: 0,
        track_ps: vec![],
        gauge_stride: 0,
    };
    let run = evolve(&bfield, &f0, &config, DriftMeta::free()).unwrap();
    let final_u = &run.snapshots.last().unwrap().1;
    let min_u = final_u.values.iter().copied().fold(f64::MAX, f64::min);
    let evolve_ok =
        run.max_principle_violation <= 1e-12 && min_u >= -1e-12 * f0.norm_linf();

    let g = gaussian(grid, 0.3);
    let (u, _) = solve_resolvent(&bfield, 5.0, &g, 1e-10).unwrap();
    let min_res = u.values.iter().copied().fold(f64::MAX, f64::min);
    let resolvent_ok = min_res >= -1e-12 * g.norm_linf();

    let cfg = SdeConfig {
        dimension: 3,
        delta: 4.0,
        sign: Sign::Plus,
        x0: [0.5, 0.0, 0.0],
        dt: 1e-3,
        t_final: 5.0,
        paths: 5000,
        eps_reg: 0.08,
        eps_hit: 0.15,
        far_box: 1e4,
        seed: 10_010,
    };
    let ens = simulate(&cfg).unwrap();
    let (p_hat, lo, hi) = wilson_interval(ens.hit_count(), cfg.paths);
    let estimator_ok = (0.0..=1.0).contains(&p_hat) && lo <= p_hat && p_hat <= hi;

    let pass = identical_orlicz && identical_sde && evolve_ok && resolvent_ok && estimator_ok;
    println!(
        "criterion 10: {} - seeded rerun byte-identical: {}, path ensemble identical \
         across 2 vs 4 threads: {}, max-principle violation {:.2e} and solution floor \
         {:.2e} within 1e-12: {}, resolvent floor {:.2e}: {}, estimator in [0, 1] with \
         containing interval: {}",
        verdict(pass),
        identical_orlicz,
        identical_sde,
        run.max_principle_violation,
        min_u,
        evolve_ok,
        min_res,
        resolvent_ok,
        estimator_ok
    );
    assert!(identical_orlicz, "orlicz rerun differs byte for byte");
    assert!(identical_sde, "sde outputs differ across thread counts");
    assert!(evolve_ok, "extremum violation beyond 1e-12");
    assert!(resolvent_ok, "resolvent positivity violated: {min_res}");
    assert!(estimator_ok, "estimator left [0, 1] or its interval");
}
