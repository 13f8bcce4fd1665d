//! Manifest schema: one manifest names one experiment kind and carries a
//! list of config blocks for it. Every block validates fully before any
//! computation starts.

use serde::{Deserialize, Serialize};

use driftlab::drift::DriftSpec;
use driftlab::grid::{Grid, GridScalarField};
use driftlab::mollify::bump_profile;
use driftlab::sde::SdeConfig;

fn one() -> f64 {
    1.0
}
fn default_lin_tol() -> f64 {
    1e-8
}
fn default_theta() -> f64 {
    0.25
}
fn default_max_m() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    pub experiments: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Formbound,
    Evolve,
    Resolvent,
    Orlicz,
    Cauchy,
    Trotter,
    Degiorgi,
    SdeScan,
    Crosscheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Formbound => "formbound",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Resolvent => "resolvent",
            ExperimentKind::Orlicz => "orlicz",
            ExperimentKind::Cauchy => "cauchy",
            ExperimentKind::Trotter => "trotter",
            ExperimentKind::Degiorgi => "degiorgi",
            ExperimentKind::SdeScan => "sde-scan",
            ExperimentKind::Crosscheck => "crosscheck",
        }
    }
}

/// Analytic initial data and probe functions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Gaussian {
        center: [f64; 3],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Bump {
        center: [f64; 3],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Indicator of the ball.
    Ball {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl InitialData {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match self {
            InitialData::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            InitialData::Bump {
                center,
                width,
                amplitude,
            } => {
                let r: f64 = (0..3)
                    .map(|a| (x[a] - center[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                // normalized so the peak value is the amplitude
                amplitude * bump_profile(r / width) * std::f64::consts::E
            }
            InitialData::Ball {
                center,
                radius,
                amplitude,
            } => {
                let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                if r2.sqrt() <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> GridScalarField {
        GridScalarField::from_fn(*grid, |x| self.eval(x))
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match self {
            InitialData::Gaussian { width, .. } => *width > 0.0,
            InitialData::Bump { width, .. } => *width > 0.0,
            InitialData::Ball { radius, .. } => *radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err("initial data needs a positive width/radius".into())
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub points: usize,
    pub half_width: f64,
}

impl GridParams {
    pub fn build(&self) -> driftlab::Result<Grid> {
        Grid::new(3, self.half_width, self.points)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormboundBlock {
    pub label: String,
    pub drift: DriftSpec,
    pub grid: GridParams,
    #[serde(default)]
    pub lambda: f64,
    /// Extra resolutions for a refinement table (the base grid is always run).
    #[serde(default)]
    pub refine: Vec<usize>,
    #[serde(default)]
    pub mollify_eps: Option<f64>,
    /// Family name for verification: gaussians | radial_bumps | hardy_optimizers.
    #[serde(default)]
    pub verify_family: Option<String>,
    /// Declared `(delta, c)` to verify against the family.
    #[serde(default)]
    pub verify_declared: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    pub label: String,
    #[serde(default)]
    pub drift: Option<DriftSpec>,
    #[serde(default)]
    pub mollify_eps: Option<f64>,
    pub grid: GridParams,
    pub tau: f64,
    pub t_final: f64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub gauge_stride: usize,
    #[serde(default)]
    pub track_ps: Vec<f64>,
    pub f0: InitialData,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Form-bound constant at budget 4 for the certificate meta.
    #[serde(default)]
    pub c4: f64,
    #[serde(default)]
    pub norm_certificates: bool,
    #[serde(default)]
    pub orlicz_certificate: bool,
    #[serde(default)]
    pub export_snapshots: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventBlock {
    pub label: String,
    pub drift: DriftSpec,
    #[serde(default)]
    pub mollify_eps: Option<f64>,
    pub grid: GridParams,
    pub mu_values: Vec<f64>,
    pub g: InitialData,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczBlock {
    pub label: String,
    pub grid: GridParams,
    /// Random fields for the embedding sweep.
    #[serde(default)]
    pub random_fields: usize,
    #[serde(default = "default_max_m")]
    pub max_m: usize,
    /// Check the unit-measure ball indicator against the closed form.
    #[serde(default)]
    pub indicator_check: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyBlock {
    pub label: String,
    pub drift: DriftSpec,
    pub epsilons: Vec<f64>,
    pub grid: GridParams,
    pub tau: f64,
    pub t0: f64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    pub f0: InitialData,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub c4: f64,
    #[serde(default)]
    pub gauge_stride: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterBlock {
    pub label: String,
    pub drift: DriftSpec,
    pub epsilons: Vec<f64>,
    pub grid: GridParams,
    pub mu_values: Vec<f64>,
    pub g: InitialData,
    pub compact_radius: f64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegiorgiBlock {
    pub label: String,
    #[serde(default)]
    pub iterate: Option<IterateParams>,
    #[serde(default)]
    pub draws: Option<DrawParams>,
    #[serde(default)]
    pub profile: Option<ProfileParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateParams {
    pub n_const: f64,
    pub c0: f64,
    pub alpha: f64,
    pub z0: f64,
    #[serde(default = "default_z_steps")]
    pub max_steps: usize,
}
fn default_z_steps() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawParams {
    pub count: usize,
    #[serde(default = "default_z_steps")]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    pub drift: DriftSpec,
    #[serde(default)]
    pub mollify_eps: Option<f64>,
    pub grid: GridParams,
    pub mu: f64,
    pub g: InitialData,
    pub center: [f64; 3],
    pub big_r: f64,
    pub levels: usize,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    /// Caccioppoli parameters `(r, R, k, p, delta)`; optional.
    #[serde(default)]
    pub caccioppoli: Option<(f64, f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeScanBlock {
    pub label: String,
    pub base: SdeConfig,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckBlock {
    pub label: String,
    pub sde: SdeConfig,
    pub drift: DriftSpec,
    pub mollify_eps: f64,
    pub grid: GridParams,
    pub tau: f64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    pub f0: InitialData,
    pub probes: Vec<[f64; 3]>,
    /// Deterministic discretization budget added to three standard errors.
    pub allowance: f64,
}
