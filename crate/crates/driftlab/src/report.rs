//! Deterministic artifact writers: CSV tables with fixed schemas and raw
//! field snapshots (flat little-endian f64 plus a JSON header).
//!
//! Float cells use the shortest round-trip decimal form, so identical runs
//! produce byte-identical files on any platform.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::degiorgi::HolderProfile;
use crate::error::Result;
use crate::grid::GridScalarField;
use crate::sde::HittingScan;
use crate::solver::certificates::CertificateRow;

/// Canonical float cell: shortest decimal that round-trips.
pub fn csv_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `header` then `rows`, newline-terminated, no trailing whitespace.
pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_certificate_csv(path: &Path, rows: &[CertificateRow]) -> Result<()> {
    write_csv(
        path,
        "t,norm,bound,ratio",
        rows.iter().map(|r| {
            vec![
                csv_f64(r.t),
                csv_f64(r.norm),
                csv_f64(r.bound),
                csv_f64(r.ratio),
            ]
        }),
    )
}

pub fn write_hitting_csv(path: &Path, scan: &HittingScan) -> Result<()> {
    write_csv(
        path,
        "delta,p_hat,ci_lo,ci_hi,M,eps_reg,eps_hit",
        scan.rows.iter().map(|r| {
            vec![
                csv_f64(r.delta),
                csv_f64(r.p_hat),
                csv_f64(r.ci_lo),
                csv_f64(r.ci_hi),
                r.paths.to_string(),
                csv_f64(r.eps_reg),
                csv_f64(r.eps_hit),
            ]
        }),
    )
}

/// Oscillation profile rows; `level_measures` aligns with the profile's
/// radii (empty when no level-set data accompanies the profile).
pub fn write_oscillation_csv(
    path: &Path,
    profile: &HolderProfile,
    level_measures: &[f64],
) -> Result<()> {
    write_csv(
        path,
        "radius,osc,level_measure,fitted_beta",
        profile.radii.iter().enumerate().map(|(i, &r)| {
            vec![
                csv_f64(r),
                csv_f64(profile.oscillations[i]),
                csv_f64(level_measures.get(i).copied().unwrap_or(0.0)),
                csv_f64(profile.beta),
            ]
        }),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub points: usize,
    pub half_width: f64,
    pub t: f64,
    pub len: usize,
    pub data_file: String,
}

/// Writes `<stem>.bin` (flat little-endian f64, lexicographic node order)
/// and `<stem>.json` describing it.
pub fn export_snapshot(dir: &Path, stem: &str, t: f64, field: &GridScalarField) -> Result<()> {
    let bin_name = format!("{stem}.bin");
    let mut bytes = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(dir.join(&bin_name))?;
    f.write_all(&bytes)?;
    let header = SnapshotHeader {
        points: field.grid.points,
        half_width: field.grid.half_width,
        t,
        len: field.values.len(),
        data_file: bin_name,
    };
    let json = serde_json::to_string_pretty(&header)?;
    fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(())
}
