//! Execution of manifests: every block is parsed and validated before any
//! computation, each produces deterministic file artifacts, and the index
//! records one pass/fail per artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use driftlab::degiorgi;
use driftlab::drift::{DriftFamily, DriftSpec};
use driftlab::form_bound::{rayleigh_delta, verify_form_bound, TestFunctionFamily};
use driftlab::grid::{Grid, GridScalarField, GridVectorField};
use driftlab::mollify::mollify_spec;
use driftlab::orlicz::{embedding_check, gauge_norm, orlicz_modular};
use driftlab::report;
use driftlab::rng::StreamRng;
use driftlab::sde;
use driftlab::solver::certificates::{norm_certificates, orlicz_energy_certificate};
use driftlab::solver::evolve::{evolve, DriftMeta, EvolutionConfig};
use driftlab::solver::resolvent::solve_resolvent;
use driftlab::solver::trotter::trotter_conditions;
use driftlab::solver::{semigroup_cauchy, CauchyReport};

use crate::manifest::*;

/// Failures split by exit code: 2 for validation, 1 for computation.
#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Computation(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation error: {m}"),
            RunError::Computation(m) => write!(f, "computation error: {m}"),
        }
    }
}

fn val_err(context: &str, e: impl std::fmt::Display) -> RunError {
    RunError::Validation(format!("{context}: {e}"))
}

fn comp_err(context: &str, e: impl std::fmt::Display) -> RunError {
    RunError::Computation(format!("{context}: {e}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub label: String,
    pub kind: String,
    pub path: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexFile {
    pub kind: String,
    pub seed: u64,
    pub artifacts: Vec<ArtifactEntry>,
    pub pass_all: bool,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| comp_err("serialize", e))?;
    fs::write(path, s).map_err(|e| comp_err("write", e))
}

/// Runs one manifest end to end and writes `index.json` into the output
/// directory. The returned index mirrors the file.
pub fn run_manifest(
    manifest: &Manifest,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<(IndexFile, PathBuf), RunError> {
    let seed = seed_override.unwrap_or(manifest.seed);
    let out_dir = out_override
        .or_else(|| manifest.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(|e| comp_err("create out dir", e))?;

    let artifacts = match manifest.kind {
        ExperimentKind::Formbound => {
            run_kind::<FormboundBlock>(manifest, seed, &out_dir, run_formbound)?
        }
        ExperimentKind::Evolve => run_kind::<EvolveBlock>(manifest, seed, &out_dir, run_evolve)?,
        ExperimentKind::Resolvent => {
            run_kind::<ResolventBlock>(manifest, seed, &out_dir, run_resolvent)?
        }
        ExperimentKind::Orlicz => run_kind::<OrliczBlock>(manifest, seed, &out_dir, run_orlicz)?,
        ExperimentKind::Cauchy => run_kind::<CauchyBlock>(manifest, seed, &out_dir, run_cauchy)?,
        ExperimentKind::Trotter => {
            run_kind::<TrotterBlock>(manifest, seed, &out_dir, run_trotter)?
        }
        ExperimentKind::Degiorgi => {
            run_kind::<DegiorgiBlock>(manifest, seed, &out_dir, run_degiorgi)?
        }
        ExperimentKind::SdeScan => {
            run_kind::<SdeScanBlock>(manifest, seed, &out_dir, run_sde_scan)?
        }
        ExperimentKind::Crosscheck => {
            run_kind::<CrosscheckBlock>(manifest, seed, &out_dir, run_crosscheck)?
        }
    };

    let index = IndexFile {
        kind: manifest.kind.name().to_string(),
        seed,
        pass_all: artifacts.iter().all(|a| a.pass),
        artifacts,
    };
    write_json(&out_dir.join("index.json"), &index)?;
    Ok((index, out_dir))
}

trait Block: for<'de> Deserialize<'de> {
    fn validate(&self) -> Result<(), RunError>;
}

fn run_kind<B: Block>(
    manifest: &Manifest,
    seed: u64,
    out_dir: &Path,
    runner: impl Fn(&B, u64, &Path) -> Result<Vec<ArtifactEntry>, RunError>,
) -> Result<Vec<ArtifactEntry>, RunError> {
    // parse and validate everything before the first computation
    let mut blocks = Vec::with_capacity(manifest.experiments.len());
    for (i, v) in manifest.experiments.iter().enumerate() {
        let block: B = serde_json::from_value(v.clone())
            .map_err(|e| val_err(&format!("experiment[{i}]"), e))?;
        block.validate()?;
        blocks.push(block);
    }
    let mut artifacts = Vec::new();
    for block in &blocks {
        artifacts.extend(runner(block, seed, out_dir)?);
    }
    Ok(artifacts)
}

fn sample_drift(
    spec: &DriftSpec,
    mollify_eps: Option<f64>,
    grid: &Grid,
) -> Result<GridVectorField, RunError> {
    match mollify_eps {
        Some(eps) => mollify_spec(spec, eps, grid).map_err(|e| comp_err("mollify", e)),
        None => Ok(spec.sample(grid, grid.spacing() / 2.0)),
    }
}

/// Config-time check that a requested mollifier resolves on the grid.
fn check_mollify(label: &str, eps: Option<f64>, grid: &GridParams) -> Result<(), RunError> {
    let Some(eps) = eps else { return Ok(()) };
    let g = grid.build().map_err(|e| val_err(label, e))?;
    if eps < 2.0 * g.spacing() {
        return Err(val_err(
            label,
            format!(
                "mollify_eps: width {eps} under-resolves the grid (needs >= 2h = {})",
                2.0 * g.spacing()
            ),
        ));
    }
    Ok(())
}

/// Certificate constants for the block's drift; compact families get the
/// full set, unbounded ones only carry `(delta, c)`.
fn build_meta(spec: Option<&DriftSpec>, theta: f64, c4: f64) -> Result<DriftMeta, RunError> {
    let Some(s) = spec else {
        return Ok(DriftMeta::free());
    };
    match &s.family {
        DriftFamily::TailDecay { tail_c, alpha, r } => {
            let m = DriftMeta::compact(3, s.declared_delta, c4, *r, theta)
                .map_err(|e| val_err("meta", e))?;
            let tail_sup = tail_c * r.powf(-alpha);
            let tail_l2 = (4.0 * std::f64::consts::PI * tail_c * tail_c
                * r.powf(3.0 - 2.0 * alpha)
                / (2.0 * alpha - 3.0))
                .sqrt();
            Ok(m.with_tail(tail_sup, tail_l2))
        }
        _ => match s.effective_support() {
            Some(r) => DriftMeta::compact(3, s.declared_delta, c4, r, theta)
                .map_err(|e| val_err("meta", e)),
            None => {
                let mut m = DriftMeta::free();
                m.delta = s.declared_delta;
                m.c = s.declared_c;
                m.theta = theta;
                m.a = 1.0 + 1.0 / theta;
                Ok(m)
            }
        },
    }
}

// ---------------------------------------------------------------- formbound

impl Block for FormboundBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.drift.validate().map_err(|e| val_err(&self.label, e))?;
        self.grid.build().map_err(|e| val_err(&self.label, e))?;
        check_mollify(&self.label, self.mollify_eps, &self.grid)?;
        if self.lambda < 0.0 {
            return Err(val_err(&self.label, "lambda must be nonnegative"));
        }
        for &n in &self.refine {
            Grid::new(3, self.grid.half_width, n).map_err(|e| val_err(&self.label, e))?;
        }
        if let Some(name) = &self.verify_family {
            family_by_name(name).map_err(|e| val_err(&self.label, e))?;
            if self.verify_declared.is_none() {
                return Err(val_err(&self.label, "verify_family needs verify_declared"));
            }
        }
        Ok(())
    }
}

fn family_by_name(name: &str) -> Result<TestFunctionFamily, String> {
    match name {
        "gaussians" => Ok(TestFunctionFamily::gaussians()),
        "radial_bumps" => Ok(TestFunctionFamily::radial_bumps()),
        "hardy_optimizers" => Ok(TestFunctionFamily::hardy_optimizers()),
        other => Err(format!("unknown test family `{other}`")),
    }
}

#[derive(Serialize)]
struct FormboundReport {
    label: String,
    lambda: f64,
    delta_est: f64,
    rows: Vec<(usize, f64, f64, usize, f64)>,
    declared: Option<(f64, f64)>,
    worst_ratio: Option<f64>,
    pass: bool,
}

fn run_formbound(
    block: &FormboundBlock,
    _seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let mut sizes = vec![block.grid.points];
    sizes.extend(&block.refine);
    let mut rows = Vec::new();
    let mut base_estimate = None;
    for &n in &sizes {
        let grid = Grid::new(3, block.grid.half_width, n).map_err(|e| val_err(&block.label, e))?;
        let b = sample_drift(&block.drift, block.mollify_eps, &grid)?;
        let est = rayleigh_delta(&b, block.lambda, &grid)
            .map_err(|e| comp_err(&block.label, e))?;
        rows.push((
            n,
            est.grid_resolution,
            est.delta_est,
            est.iterations,
            est.residual,
        ));
        if n == block.grid.points {
            base_estimate = Some(est);
        }
    }
    let base = base_estimate.expect("base size always runs");

    let mut verify_pass = true;
    let mut worst_ratio = None;
    if let (Some(name), Some((delta, c))) = (&block.verify_family, block.verify_declared) {
        let family = family_by_name(name).map_err(|e| val_err(&block.label, e))?;
        let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
        let b = sample_drift(&block.drift, block.mollify_eps, &grid)?;
        let report = verify_form_bound(&b, delta, c, &family)
            .map_err(|e| comp_err(&block.label, e))?;
        verify_pass = report.pass;
        worst_ratio = Some(report.worst_ratio);
    }

    let csv_path = out_dir.join(format!("{}_rayleigh.csv", block.label));
    report::write_csv(
        &csv_path,
        "points,h,delta_est,iterations,residual",
        rows.iter().map(|r| {
            vec![
                r.0.to_string(),
                report::csv_f64(r.1),
                report::csv_f64(r.2),
                r.3.to_string(),
                report::csv_f64(r.4),
            ]
        }),
    )
    .map_err(|e| comp_err(&block.label, e))?;

    let json_path = out_dir.join(format!("{}_report.json", block.label));
    write_json(
        &json_path,
        &FormboundReport {
            label: block.label.clone(),
            lambda: block.lambda,
            delta_est: base.delta_est,
            rows,
            declared: block.verify_declared,
            worst_ratio,
            pass: verify_pass,
        },
    )?;
    Ok(vec![
        ArtifactEntry {
            label: block.label.clone(),
            kind: "rayleigh".into(),
            path: path_str(&csv_path),
            pass: true,
        },
        ArtifactEntry {
            label: block.label.clone(),
            kind: "formbound-report".into(),
            path: path_str(&json_path),
            pass: verify_pass,
        },
    ])
}

fn path_str(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.to_string_lossy().into_owned())
}

// ------------------------------------------------------------------- evolve

impl Block for EvolveBlock {
    fn validate(&self) -> Result<(), RunError> {
        if let Some(d) = &self.drift {
            d.validate().map_err(|e| val_err(&self.label, e))?;
        }
        self.grid.build().map_err(|e| val_err(&self.label, e))?;
        check_mollify(&self.label, self.mollify_eps, &self.grid)?;
        self.f0.validate().map_err(|e| val_err(&self.label, e))?;
        let cfg = self.config();
        cfg.validate().map_err(|e| val_err(&self.label, e))?;
        if self.orlicz_certificate {
            let meta = build_meta(self.drift.as_ref(), self.theta, self.c4)?;
            if meta.c5 == 0.0 && self.drift.is_some() {
                return Err(val_err(
                    &self.label,
                    "orlicz certificate needs a compactly supported drift",
                ));
            }
            if self.snapshot_stride == 0 {
                return Err(val_err(
                    &self.label,
                    "orlicz certificate needs snapshot_stride > 0",
                ));
            }
        }
        Ok(())
    }
}

impl EvolveBlock {
    fn config(&self) -> EvolutionConfig {
        let track_ps = if self.track_ps.is_empty() {
            vec![2.0, 4.0]
        } else {
            self.track_ps.clone()
        };
        EvolutionConfig {
            tau: self.tau,
            t_final: self.t_final,
            lin_tol: self.lin_tol,
            snapshot_stride: self.snapshot_stride,
            track_ps,
            gauge_stride: self.gauge_stride,
        }
    }
}

#[derive(Serialize)]
struct EvolveSummary {
    label: String,
    steps: usize,
    max_principle_violation: f64,
    meta: DriftMeta,
    norm_certificates_pass: Option<bool>,
    orlicz_pass: Option<bool>,
    orlicz_sup_slack: Option<f64>,
    pass: bool,
}

fn run_evolve(
    block: &EvolveBlock,
    _seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let b = match &block.drift {
        Some(spec) => sample_drift(spec, block.mollify_eps, &grid)?,
        None => GridVectorField::zeros(grid),
    };
    let f0 = block.f0.sample(&grid);
    let meta = build_meta(block.drift.as_ref(), block.theta, block.c4)?;
    let cfg = block.config();
    let run = evolve(&b, &f0, &cfg, meta).map_err(|e| comp_err(&block.label, e))?;

    let mut artifacts = Vec::new();
    let violation_pass = run.max_principle_violation <= 1e-12;

    let mut norm_pass = None;
    if block.norm_certificates {
        let rep = norm_certificates(&run).map_err(|e| comp_err(&block.label, e))?;
        for (p, _omega, rows) in &rep.tables {
            let path = out_dir.join(format!("{}_cert_p{}.csv", block.label, p));
            report::write_certificate_csv(&path, rows).map_err(|e| comp_err(&block.label, e))?;
            artifacts.push(ArtifactEntry {
                label: block.label.clone(),
                kind: "certificates".into(),
                path: path_str(&path),
                pass: rows.iter().all(|r| r.ratio <= 1.0 + 1e-2),
            });
        }
        norm_pass = Some(rep.pass);
    }

    let mut orlicz_pass = None;
    let mut orlicz_slack = None;
    if block.orlicz_certificate {
        let rep =
            orlicz_energy_certificate(&run, 5e-2).map_err(|e| comp_err(&block.label, e))?;
        let path = out_dir.join(format!("{}_orlicz_cert.csv", block.label));
        report::write_csv(
            &path,
            "check,t,lhs,rhs,slack",
            rep.modular_energy
                .iter()
                .map(|r| ("modular_energy", r))
                .chain(rep.energy_only.iter().map(|r| ("energy", r)))
                .chain(rep.quasi_contraction.iter().map(|r| ("quasi", r)))
                .map(|(name, r)| {
                    vec![
                        name.to_string(),
                        report::csv_f64(r.0),
                        report::csv_f64(r.1),
                        report::csv_f64(r.2),
                        report::csv_f64(r.3),
                    ]
                }),
        )
        .map_err(|e| comp_err(&block.label, e))?;
        artifacts.push(ArtifactEntry {
            label: block.label.clone(),
            kind: "orlicz-certificate".into(),
            path: path_str(&path),
            pass: rep.pass,
        });
        orlicz_pass = Some(rep.pass);
        orlicz_slack = Some(rep.sup_slack);
    }

    if block.export_snapshots {
        for (i, (t, field)) in run.snapshots.iter().enumerate() {
            let stem = format!("{}_snap{:04}", block.label, i);
            report::export_snapshot(out_dir, &stem, *t, field)
                .map_err(|e| comp_err(&block.label, e))?;
        }
    }

    let pass = violation_pass && norm_pass.unwrap_or(true) && orlicz_pass.unwrap_or(true);
    let json_path = out_dir.join(format!("{}_summary.json", block.label));
    write_json(
        &json_path,
        &EvolveSummary {
            label: block.label.clone(),
            steps: run.steps,
            max_principle_violation: run.max_principle_violation,
            meta,
            norm_certificates_pass: norm_pass,
            orlicz_pass,
            orlicz_sup_slack: orlicz_slack,
            pass,
        },
    )?;
    artifacts.push(ArtifactEntry {
        label: block.label.clone(),
        kind: "evolve-summary".into(),
        path: path_str(&json_path),
        pass,
    });
    Ok(artifacts)
}

// ---------------------------------------------------------------- resolvent

impl Block for ResolventBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.drift.validate().map_err(|e| val_err(&self.label, e))?;
        self.grid.build().map_err(|e| val_err(&self.label, e))?;
        check_mollify(&self.label, self.mollify_eps, &self.grid)?;
        self.g.validate().map_err(|e| val_err(&self.label, e))?;
        if self.mu_values.is_empty() || self.mu_values.iter().any(|&m| m <= 0.0) {
            return Err(val_err(&self.label, "mu values must be positive"));
        }
        Ok(())
    }
}

fn run_resolvent(
    block: &ResolventBlock,
    _seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let b = sample_drift(&block.drift, block.mollify_eps, &grid)?;
    let g = block.g.sample(&grid);
    let g_sup = g.norm_linf();
    let mut rows = Vec::new();
    for &mu in &block.mu_values {
        let (u, stats) =
            solve_resolvent(&b, mu, &g, block.lin_tol).map_err(|e| comp_err(&block.label, e))?;
        let scaled = u.scaled(mu);
        let contraction = scaled.norm_linf() / g_sup;
        let approx_id = scaled
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let min_u = u.min_max().0;
        rows.push((mu, contraction, approx_id, min_u, stats.iterations));
    }
    let csv_path = out_dir.join(format!("{}_resolvent.csv", block.label));
    report::write_csv(
        &csv_path,
        "mu,contraction,sup_diff,min_u,iterations",
        rows.iter().map(|r| {
            vec![
                report::csv_f64(r.0),
                report::csv_f64(r.1),
                report::csv_f64(r.2),
                report::csv_f64(r.3),
                r.4.to_string(),
            ]
        }),
    )
    .map_err(|e| comp_err(&block.label, e))?;
    let contraction_ok = rows.iter().all(|r| r.1 <= 1.0 + 1e-6);
    let approx_decreasing = rows.windows(2).all(|w| w[1].2 < w[0].2);
    Ok(vec![ArtifactEntry {
        label: block.label.clone(),
        kind: "resolvent".into(),
        path: path_str(&csv_path),
        pass: contraction_ok && approx_decreasing,
    }])
}

// ------------------------------------------------------------------- orlicz

impl Block for OrliczBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.grid.build().map_err(|e| val_err(&self.label, e))?;
        if self.max_m == 0 {
            return Err(val_err(&self.label, "max_m must be at least 1"));
        }
        if self.random_fields == 0 && !self.indicator_check {
            return Err(val_err(&self.label, "nothing to do: no fields, no check"));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct OrliczSummary {
    label: String,
    indicator_gauge: Option<f64>,
    indicator_reference: Option<f64>,
    indicator_measure: Option<f64>,
    modular_at_gauge: Option<f64>,
    all_embeddings_pass: bool,
    pass: bool,
}

fn run_orlicz(
    block: &OrliczBlock,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for field_id in 0..block.random_fields {
        let mut rng = StreamRng::new(seed, field_id as u64);
        let amplitude = 10f64.powf(rng.uniform_in(-1.0, 1.0));
        let values: Vec<f64> = (0..grid.len())
            .map(|_| amplitude * rng.uniform_in(-1.0, 1.0))
            .collect();
        let f = GridScalarField { grid, values };
        let table = embedding_check(&f, block.max_m).map_err(|e| comp_err(&block.label, e))?;
        for row in table {
            all_pass &= row.pass;
            rows.push((field_id, row));
        }
    }
    let csv_path = out_dir.join(format!("{}_embedding.csv", block.label));
    report::write_csv(
        &csv_path,
        "field,m,lp_norm,bound,pass",
        rows.iter().map(|(id, r)| {
            vec![
                id.to_string(),
                r.m.to_string(),
                report::csv_f64(r.lp_norm),
                report::csv_f64(r.bound),
                r.pass.to_string(),
            ]
        }),
    )
    .map_err(|e| comp_err(&block.label, e))?;

    let mut indicator_gauge = None;
    let mut indicator_reference = None;
    let mut indicator_measure = None;
    let mut modular_at_gauge = None;
    let mut indicator_pass = true;
    if block.indicator_check {
        let h3 = grid.cell_measure();
        let k = (1.0 / h3).round() as usize;
        let mut values = vec![0.0; grid.len()];
        for v in values.iter_mut().take(k) {
            *v = 1.0;
        }
        let f = GridScalarField { grid, values };
        let measure = k as f64 * h3;
        let gauge = gauge_norm(&f).map_err(|e| comp_err(&block.label, e))?;
        // closed form for an indicator of measure m
        let reference = 1.0 / (1.0 + 1.0 / measure).acosh();
        let modular = orlicz_modular(&f, gauge.value).map_err(|e| comp_err(&block.label, e))?;
        indicator_pass = (gauge.value - reference).abs() <= 1e-6 && modular <= 1.0 + 1e-6;
        indicator_gauge = Some(gauge.value);
        indicator_reference = Some(reference);
        indicator_measure = Some(measure);
        modular_at_gauge = Some(modular);
    }

    let pass = all_pass && indicator_pass;
    let json_path = out_dir.join(format!("{}_orlicz.json", block.label));
    write_json(
        &json_path,
        &OrliczSummary {
            label: block.label.clone(),
            indicator_gauge,
            indicator_reference,
            indicator_measure,
            modular_at_gauge,
            all_embeddings_pass: all_pass,
            pass,
        },
    )?;
    Ok(vec![
        ArtifactEntry {
            label: block.label.clone(),
            kind: "embedding".into(),
            path: path_str(&csv_path),
            pass: all_pass,
        },
        ArtifactEntry {
            label: block.label.clone(),
            kind: "orlicz-summary".into(),
            path: path_str(&json_path),
            pass,
        },
    ])
}

// ------------------------------------------------------------------- cauchy

impl Block for CauchyBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.drift.validate().map_err(|e| val_err(&self.label, e))?;
        let grid = self.grid.build().map_err(|e| val_err(&self.label, e))?;
        self.f0.validate().map_err(|e| val_err(&self.label, e))?;
        if self.epsilons.len() < 3 {
            return Err(val_err(&self.label, "need at least 3 mollification levels"));
        }
        let h = grid.spacing();
        for &eps in &self.epsilons {
            if eps < 2.0 * h {
                return Err(val_err(
                    &self.label,
                    format!("epsilon {eps} under-resolves the grid (needs >= 2h = {})", 2.0 * h),
                ));
            }
        }
        Ok(())
    }
}

fn run_cauchy(
    block: &CauchyBlock,
    _seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let f0 = block.f0.sample(&grid);
    let meta = build_meta(Some(&block.drift), block.theta, block.c4)?;
    let rep: CauchyReport = semigroup_cauchy(
        &block.drift,
        &grid,
        &block.epsilons,
        &f0,
        block.tau,
        block.t0,
        block.lin_tol,
        meta,
        block.gauge_stride,
    )
    .map_err(|e| comp_err(&block.label, e))?;

    let csv_path = out_dir.join(format!("{}_cauchy.csv", block.label));
    let m = rep.epsilons.len();
    let mut rows = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            rows.push(vec![
                report::csv_f64(rep.epsilons[i]),
                report::csv_f64(rep.epsilons[j]),
                report::csv_f64(rep.sup_gauge[i][j]),
                report::csv_f64(rep.grad_integral[i][j]),
            ]);
        }
    }
    report::write_csv(&csv_path, "eps_i,eps_j,sup_gauge,grad_integral", rows)
        .map_err(|e| comp_err(&block.label, e))?;
    let json_path = out_dir.join(format!("{}_cauchy.json", block.label));
    write_json(&json_path, &rep)?;
    Ok(vec![
        ArtifactEntry {
            label: block.label.clone(),
            kind: "cauchy".into(),
            path: path_str(&csv_path),
            pass: rep.pass,
        },
        ArtifactEntry {
            label: block.label.clone(),
            kind: "cauchy-report".into(),
            path: path_str(&json_path),
            pass: rep.pass,
        },
    ])
}

// ------------------------------------------------------------------ trotter

impl Block for TrotterBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.drift.validate().map_err(|e| val_err(&self.label, e))?;
        let grid = self.grid.build().map_err(|e| val_err(&self.label, e))?;
        self.g.validate().map_err(|e| val_err(&self.label, e))?;
        if !(self.compact_radius > 0.0 && self.compact_radius < grid.half_width) {
            return Err(val_err(&self.label, "compact_radius must lie inside the box"));
        }
        if self.epsilons.len() < 2 {
            return Err(val_err(&self.label, "need at least 2 levels"));
        }
        for &eps in &self.epsilons {
            check_mollify(&self.label, Some(eps), &self.grid)?;
        }
        Ok(())
    }
}

fn run_trotter(
    block: &TrotterBlock,
    _seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let g = block.g.sample(&grid);
    let rep = trotter_conditions(
        &block.drift,
        &grid,
        &block.epsilons,
        &g,
        &block.mu_values,
        block.compact_radius,
        block.lin_tol,
    )
    .map_err(|e| comp_err(&block.label, e))?;
    let json_path = out_dir.join(format!("{}_trotter.json", block.label));
    write_json(&json_path, &rep)?;
    let csv_path = out_dir.join(format!("{}_condition3.csv", block.label));
    report::write_csv(
        &csv_path,
        "mu,sup_over_levels",
        rep.mu_values
            .iter()
            .zip(&rep.condition3)
            .map(|(mu, v)| vec![report::csv_f64(*mu), report::csv_f64(*v)]),
    )
    .map_err(|e| comp_err(&block.label, e))?;
    Ok(vec![
        ArtifactEntry {
            label: block.label.clone(),
            kind: "trotter-report".into(),
            path: path_str(&json_path),
            pass: rep.pass,
        },
        ArtifactEntry {
            label: block.label.clone(),
            kind: "condition3".into(),
            path: path_str(&csv_path),
            pass: rep.pass_condition3,
        },
    ])
}

// ----------------------------------------------------------------- degiorgi

impl Block for DegiorgiBlock {
    fn validate(&self) -> Result<(), RunError> {
        if self.iterate.is_none() && self.draws.is_none() && self.profile.is_none() {
            return Err(val_err(&self.label, "empty block: needs iterate, draws, or profile"));
        }
        if let Some(it) = &self.iterate {
            if !(it.n_const > 0.0 && it.c0 > 1.0 && it.alpha > 0.0 && it.z0 >= 0.0) {
                return Err(val_err(&self.label, "iterate needs N > 0, C0 > 1, alpha > 0, z0 >= 0"));
            }
        }
        if let Some(d) = &self.draws {
            if d.count == 0 {
                return Err(val_err(&self.label, "draws.count must be positive"));
            }
        }
        if let Some(p) = &self.profile {
            p.drift.validate().map_err(|e| val_err(&self.label, e))?;
            p.grid.build().map_err(|e| val_err(&self.label, e))?;
            check_mollify(&self.label, p.mollify_eps, &p.grid)?;
            p.g.validate().map_err(|e| val_err(&self.label, e))?;
            if !(p.mu > 0.0 && p.big_r > 0.0 && p.levels >= 3) {
                return Err(val_err(&self.label, "profile needs mu > 0, big_r > 0, levels >= 3"));
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct DrawsSummary {
    count: usize,
    all_converged: bool,
    max_steps_used: usize,
}

fn run_degiorgi(
    block: &DegiorgiBlock,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let mut artifacts = Vec::new();
    if let Some(it) = &block.iterate {
        let z = degiorgi::iterate_z(it.n_const, it.c0, it.alpha, it.z0, it.max_steps)
            .map_err(|e| comp_err(&block.label, e))?;
        let csv_path = out_dir.join(format!("{}_orbit.csv", block.label));
        report::write_csv(
            &csv_path,
            "m,z",
            z.orbit
                .iter()
                .enumerate()
                .map(|(m, v)| vec![m.to_string(), report::csv_f64(*v)]),
        )
        .map_err(|e| comp_err(&block.label, e))?;
        // below the critical mass the orbit must contract; above it anything goes
        let pass = if it.z0 <= z.z_star { z.converged } else { true };
        artifacts.push(ArtifactEntry {
            label: block.label.clone(),
            kind: "orbit".into(),
            path: path_str(&csv_path),
            pass,
        });
    }
    if let Some(d) = &block.draws {
        let mut all = true;
        let mut max_steps = 0usize;
        let mut rng = StreamRng::new(seed, 7001);
        for _ in 0..d.count {
            let n_const = rng.uniform_in(0.5, 5.0);
            let c0 = rng.uniform_in(1.5, 8.0);
            let alpha = rng.uniform_in(0.1, 1.0);
            let zs = degiorgi::z_star(n_const, c0, alpha).map_err(|e| comp_err(&block.label, e))?;
            let z0 = rng.uniform_in(0.0, 1.0) * zs;
            let z = degiorgi::iterate_z(n_const, c0, alpha, z0, d.max_steps)
                .map_err(|e| comp_err(&block.label, e))?;
            all &= z.converged;
            max_steps = max_steps.max(z.steps);
        }
        let json_path = out_dir.join(format!("{}_draws.json", block.label));
        write_json(
            &json_path,
            &DrawsSummary {
                count: d.count,
                all_converged: all,
                max_steps_used: max_steps,
            },
        )?;
        artifacts.push(ArtifactEntry {
            label: block.label.clone(),
            kind: "draws".into(),
            path: path_str(&json_path),
            pass: all,
        });
    }
    if let Some(p) = &block.profile {
        let grid = p.grid.build().map_err(|e| val_err(&block.label, e))?;
        let b = sample_drift(&p.drift, p.mollify_eps, &grid)?;
        let g = p.g.sample(&grid);
        let (u, _) =
            solve_resolvent(&b, p.mu, &g, p.lin_tol).map_err(|e| comp_err(&block.label, e))?;
        let profile = degiorgi::holder_profile(&u, p.center, p.big_r, p.levels, 0.0)
            .map_err(|e| comp_err(&block.label, e))?;
        let mut level_measures = vec![0.0; profile.radii.len()];
        let mut cacc_pass = true;
        if let Some((r, big_r, k, pexp, delta)) = p.caccioppoli {
            let rep = degiorgi::caccioppoli_check(&u, p.center, r, big_r, k, pexp, delta)
                .map_err(|e| comp_err(&block.label, e))?;
            if !rep.skipped {
                cacc_pass = rep.k_min.is_finite();
                for lm in level_measures.iter_mut() {
                    *lm = rep.level_measure;
                }
            }
        }
        let csv_path = out_dir.join(format!("{}_oscillation.csv", block.label));
        report::write_oscillation_csv(&csv_path, &profile, &level_measures)
            .map_err(|e| comp_err(&block.label, e))?;
        let pass = profile.beta.is_finite() && profile.beta > 0.0 && cacc_pass;
        artifacts.push(ArtifactEntry {
            label: block.label.clone(),
            kind: "oscillation".into(),
            path: path_str(&csv_path),
            pass,
        });
    }
    Ok(artifacts)
}

// ----------------------------------------------------------------- sde-scan

impl Block for SdeScanBlock {
    fn validate(&self) -> Result<(), RunError> {
        self.base.validate().map_err(|e| val_err(&self.label, e))?;
        if self.base.eps_hit <= 0.0 {
            return Err(val_err(&self.label, "hitting scan needs eps_hit > 0"));
        }
        if self.deltas.is_empty() || self.deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(val_err(&self.label, "deltas must be ascending and nonempty"));
        }
        // the step-size invariant must hold for the strongest drift
        let mut worst = self.base.clone();
        worst.delta = *self.deltas.last().expect("nonempty");
        worst.validate().map_err(|e| val_err(&self.label, e))?;
        Ok(())
    }
}

fn run_sde_scan(
    block: &SdeScanBlock,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let mut base = block.base.clone();
    base.seed = seed;
    let scan = sde::hitting_scan(&base, &block.deltas).map_err(|e| comp_err(&block.label, e))?;
    let csv_path = out_dir.join(format!("{}_hitting.csv", block.label));
    report::write_hitting_csv(&csv_path, &scan).map_err(|e| comp_err(&block.label, e))?;
    let json_path = out_dir.join(format!("{}_hitting.json", block.label));
    write_json(&json_path, &scan)?;
    Ok(vec![
        ArtifactEntry {
            label: block.label.clone(),
            kind: "hitting".into(),
            path: path_str(&csv_path),
            pass: scan.monotone_within_ci,
        },
        ArtifactEntry {
            label: block.label.clone(),
            kind: "hitting-report".into(),
            path: path_str(&json_path),
            pass: scan.monotone_within_ci,
        },
    ])
}

// --------------------------------------------------------------- crosscheck

impl Block for CrosscheckBlock {
    fn validate(&self) -> Result<(), RunError> {
        let mut sde_cfg = self.sde.clone();
        sde_cfg.eps_hit = 0.0;
        sde_cfg.validate().map_err(|e| val_err(&self.label, e))?;
        self.drift.validate().map_err(|e| val_err(&self.label, e))?;
        if !matches!(self.drift.family, DriftFamily::Hardy { .. }) {
            return Err(val_err(&self.label, "cross-check drift must be the Hardy field"));
        }
        let grid = self.grid.build().map_err(|e| val_err(&self.label, e))?;
        self.f0.validate().map_err(|e| val_err(&self.label, e))?;
        if self.probes.is_empty() {
            return Err(val_err(&self.label, "needs at least one probe point"));
        }
        let l = grid.half_width;
        if self
            .probes
            .iter()
            .any(|p| p.iter().any(|v| v.abs() >= l))
        {
            return Err(val_err(&self.label, "probe outside the grid box"));
        }
        if !(self.allowance >= 0.0) {
            return Err(val_err(&self.label, "allowance must be nonnegative"));
        }
        check_mollify(&self.label, Some(self.mollify_eps), &self.grid)?;
        Ok(())
    }
}

fn run_crosscheck(
    block: &CrosscheckBlock,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<ArtifactEntry>, RunError> {
    let grid = block.grid.build().map_err(|e| val_err(&block.label, e))?;
    let b = mollify_spec(&block.drift, block.mollify_eps, &grid)
        .map_err(|e| comp_err(&block.label, e))?;
    let f0 = block.f0.sample(&grid);
    let cfg = EvolutionConfig {
        tau: block.tau,
        t_final: block.sde.t_final,
        lin_tol: block.lin_tol,
        snapshot_stride: 0,
        track_ps: vec![2.0],
        gauge_stride: 0,
    };
    let meta = build_meta(Some(&block.drift), 0.25, 0.0)?;
    let run = evolve(&b, &f0, &cfg, meta).map_err(|e| comp_err(&block.label, e))?;
    let (_, u_final) = run.snapshots.last().expect("final snapshot always kept");
    let pde_values: Vec<f64> = block.probes.iter().map(|&p| u_final.interpolate(p)).collect();

    let mut sde_cfg = block.sde.clone();
    sde_cfg.seed = seed;
    sde_cfg.eps_hit = 0.0;
    let rows = sde::feller_crosscheck(
        &sde_cfg,
        &block.drift,
        &block.probes,
        |x| block.f0.eval(x),
        &pde_values,
        block.allowance,
    )
    .map_err(|e| comp_err(&block.label, e))?;

    let csv_path = out_dir.join(format!("{}_crosscheck.csv", block.label));
    report::write_csv(
        &csv_path,
        "px,py,pz,mc_mean,mc_se,pde_value,tolerance,pass",
        rows.iter().map(|r| {
            vec![
                report::csv_f64(r.x[0]),
                report::csv_f64(r.x[1]),
                report::csv_f64(r.x[2]),
                report::csv_f64(r.mc_mean),
                report::csv_f64(r.mc_se),
                report::csv_f64(r.pde_value),
                report::csv_f64(r.tolerance),
                r.pass.to_string(),
            ]
        }),
    )
    .map_err(|e| comp_err(&block.label, e))?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(vec![ArtifactEntry {
        label: block.label.clone(),
        kind: "crosscheck".into(),
        path: path_str(&csv_path),
        pass,
    }])
}
