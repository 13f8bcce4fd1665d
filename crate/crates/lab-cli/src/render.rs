//! Reads an index file and turns each tabular artifact into an SVG plot.
//! Artifacts whose data files or columns are missing are skipped with a
//! note; an empty index produces no plots. Neither case is an error.

use std::fs;
use std::path::{Path, PathBuf};

use crate::experiments::{ArtifactEntry, IndexFile, RunError};
use crate::svg::{Chart, Series, Whisker};

pub struct RenderSummary {
    pub plots: Vec<String>,
    pub skipped: Vec<String>,
}

struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    fn col(&self, name: &str) -> Option<&[f64]> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }
}

fn read_table(path: &Path) -> Option<Table> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let headers: Vec<String> = lines.next()?.split(',').map(|s| s.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for (i, cell) in line.split(',').enumerate() {
            if i >= columns.len() {
                return None;
            }
            columns[i].push(cell.trim().parse::<f64>().unwrap_or(f64::NAN));
        }
    }
    if columns.iter().any(|c| c.len() != columns[0].len()) {
        return None;
    }
    Some(Table { headers, columns })
}

fn zip2(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

/// Critical coupling where weak solutions cease to exist in three dimensions.
const THRESHOLD_3D: f64 = 36.0;

fn chart_certificates(t: &Table, stem: &str) -> Option<Chart> {
    let time = t.col("t")?;
    let norm = t.col("norm")?;
    let bound = t.col("bound")?;
    Some(Chart {
        title: format!("norm decay with certified bound: {stem}"),
        x_label: "t".into(),
        y_label: "norm".into(),
        log_y: true,
        series: vec![
            Series::line("computed norm", zip2(time, norm)),
            Series::dashed("certified bound", zip2(time, bound)),
        ],
        ..Chart::default()
    })
}

fn chart_hitting(t: &Table, stem: &str) -> Option<Chart> {
    let delta = t.col("delta")?;
    let p_hat = t.col("p_hat")?;
    let lo = t.col("ci_lo")?;
    let hi = t.col("ci_hi")?;
    let whiskers = delta
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&lo, &hi))| Whisker { x, lo, hi })
        .collect();
    Some(Chart {
        title: format!("hitting probability vs coupling: {stem}"),
        x_label: "delta".into(),
        y_label: "hitting probability".into(),
        series: vec![Series::dots("estimate with 95% CI", zip2(delta, p_hat))],
        vlines: vec![(THRESHOLD_3D, "no-weak-solution threshold".into())],
        whiskers,
        ..Chart::default()
    })
}

fn chart_oscillation(t: &Table, stem: &str) -> Option<Chart> {
    let radius = t.col("radius")?;
    let osc = t.col("osc")?;
    let beta = t.col("fitted_beta")?.first().copied()?;
    let mut pts = zip2(radius, osc);
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // anchor the fitted power law at the outermost radius
    let fit: Vec<(f64, f64)> = pts
        .last()
        .map(|&(r0, o0)| {
            pts.iter()
                .map(|&(r, _)| (r, o0 * (r / r0).powf(beta)))
                .collect()
        })
        .unwrap_or_default();
    Some(Chart {
        title: format!("oscillation decay, fitted beta = {beta:.3}: {stem}"),
        x_label: "radius".into(),
        y_label: "oscillation".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series::dots("measured oscillation", pts),
            Series::dashed("fitted rate", fit),
        ],
        ..Chart::default()
    })
}

fn chart_rayleigh(t: &Table, stem: &str) -> Option<Chart> {
    let points = t.col("points")?;
    let delta = t.col("delta_est")?;
    Some(Chart {
        title: format!("form-bound estimate vs resolution: {stem}"),
        x_label: "grid points per axis".into(),
        y_label: "delta estimate".into(),
        series: vec![Series::dots("Rayleigh quotient", zip2(points, delta))],
        ..Chart::default()
    })
}

fn chart_resolvent(t: &Table, stem: &str) -> Option<Chart> {
    let mu = t.col("mu")?;
    let contraction = t.col("contraction")?;
    let diff = t.col("sup_diff")?;
    Some(Chart {
        title: format!("resolvent contraction and approximation: {stem}"),
        x_label: "mu".into(),
        y_label: "sup norm".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series::dots("mu ||(mu+L)^-1 g|| / ||g||", zip2(mu, contraction)),
            Series::dots("||mu (mu+L)^-1 g - g||", zip2(mu, diff)),
        ],
        ..Chart::default()
    })
}

fn chart_condition3(t: &Table, stem: &str) -> Option<Chart> {
    let mu = t.col("mu")?;
    let sup = t.col("sup_over_levels")?;
    Some(Chart {
        title: format!("approximate identity, uniform over levels: {stem}"),
        x_label: "mu".into(),
        y_label: "sup over levels".into(),
        log_x: true,
        log_y: true,
        series: vec![Series::dots("sup_n ||mu R_mu g - g||", zip2(mu, sup))],
        ..Chart::default()
    })
}

fn chart_orbit(t: &Table, stem: &str) -> Option<Chart> {
    let m = t.col("m")?;
    let z = t.col("z")?;
    Some(Chart {
        title: format!("level-set iteration orbit: {stem}"),
        x_label: "step".into(),
        y_label: "z".into(),
        log_y: true,
        series: vec![Series::dots("orbit", zip2(m, z))],
        ..Chart::default()
    })
}

fn chart_cauchy(t: &Table, stem: &str) -> Option<Chart> {
    let eps = t.col("eps_i")?;
    let gauge = t.col("sup_gauge")?;
    let grad = t.col("grad_integral")?;
    Some(Chart {
        title: format!("mollification Cauchy differences: {stem}"),
        x_label: "coarser epsilon".into(),
        y_label: "difference".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series::dots("sup gauge difference", zip2(eps, gauge)),
            Series::dots("gradient difference integral", zip2(eps, grad)),
        ],
        ..Chart::default()
    })
}

fn chart_crosscheck(t: &Table, stem: &str) -> Option<Chart> {
    let mc = t.col("mc_mean")?;
    let pde = t.col("pde_value")?;
    let tol = t.col("tolerance")?;
    let idx: Vec<f64> = (0..mc.len()).map(|i| i as f64).collect();
    let whiskers = idx
        .iter()
        .zip(mc.iter().zip(tol))
        .map(|(&x, (&m, &t))| Whisker {
            x,
            lo: m - t,
            hi: m + t,
        })
        .collect();
    Some(Chart {
        title: format!("stochastic vs grid solution at probes: {stem}"),
        x_label: "probe index".into(),
        y_label: "value".into(),
        series: vec![
            Series::dots("Monte Carlo mean (tolerance bars)", zip2(&idx, mc)),
            Series::dots("grid solution", zip2(&idx, pde)),
        ],
        whiskers,
        ..Chart::default()
    })
}

fn build_chart(kind: &str, table: &Table, stem: &str) -> Option<Chart> {
    match kind {
        "certificates" => chart_certificates(table, stem),
        "hitting" => chart_hitting(table, stem),
        "oscillation" => chart_oscillation(table, stem),
        "rayleigh" => chart_rayleigh(table, stem),
        "resolvent" => chart_resolvent(table, stem),
        "condition3" => chart_condition3(table, stem),
        "orbit" => chart_orbit(table, stem),
        "cauchy" => chart_cauchy(table, stem),
        "crosscheck" => chart_crosscheck(table, stem),
        _ => None,
    }
}

fn plottable(kind: &str) -> bool {
    matches!(
        kind,
        "certificates"
            | "hitting"
            | "oscillation"
            | "rayleigh"
            | "resolvent"
            | "condition3"
            | "orbit"
            | "cauchy"
            | "crosscheck"
    )
}

pub fn render_index(
    index_path: &Path,
    out_override: Option<PathBuf>,
) -> Result<RenderSummary, RunError> {
    let text = fs::read_to_string(index_path)
        .map_err(|e| RunError::Validation(format!("index file {}: {e}", index_path.display())))?;
    let index: IndexFile = serde_json::from_str(&text)
        .map_err(|e| RunError::Validation(format!("index file: {e}")))?;
    let base = index_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = out_override.unwrap_or_else(|| base.clone());
    fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Computation(format!("create out dir: {e}")))?;

    let mut summary = RenderSummary {
        plots: Vec::new(),
        skipped: Vec::new(),
    };
    for artifact in &index.artifacts {
        if !plottable(&artifact.kind) {
            continue;
        }
        match render_artifact(artifact, &base, &out_dir)? {
            Ok(name) => summary.plots.push(name),
            Err(note) => summary.skipped.push(note),
        }
    }
    Ok(summary)
}

/// Outer error aborts the render; inner `Err` is a per-artifact skip note.
fn render_artifact(
    artifact: &ArtifactEntry,
    base: &Path,
    out_dir: &Path,
) -> Result<Result<String, String>, RunError> {
    let data_path = base.join(&artifact.path);
    let Some(table) = read_table(&data_path) else {
        return Ok(Err(format!(
            "{}: data file {} missing or malformed",
            artifact.label,
            data_path.display()
        )));
    };
    let stem = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| artifact.label.clone());
    let Some(chart) = build_chart(&artifact.kind, &table, &stem) else {
        return Ok(Err(format!(
            "{}: required columns absent from {}",
            artifact.label,
            data_path.display()
        )));
    };
    let Some(svg) = chart.to_svg() else {
        return Ok(Err(format!("{}: no drawable data points", artifact.label)));
    };
    let out_path = out_dir.join(format!("{stem}.svg"));
    fs::write(&out_path, svg)
        .map_err(|e| RunError::Computation(format!("write {}: {e}", out_path.display())))?;
    Ok(Ok(out_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()))
}
