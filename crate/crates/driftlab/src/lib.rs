//! Numerical laboratory for diffusion with form-bounded singular drift.
//!
//! The library estimates and verifies form bounds for Hardy-type vector
//! fields, evolves the associated parabolic problems on a Dirichlet box
//! with certificate tracking in Lebesgue and Orlicz norms, checks the
//! resolvent approximation conditions, runs the De Giorgi oscillation
//! machinery, and cross-checks everything probabilistically against the
//! regularized SDE.

pub mod degiorgi;
pub mod drift;
pub mod error;
pub mod form_bound;
pub mod grid;
pub mod linalg;
pub mod mollify;
pub mod orlicz;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sde;
pub mod solver;
pub mod weights;

pub use drift::{Bump, DriftFamily, DriftSpec, Sign};
pub use error::{Error, Result};
pub use form_bound::{
    estimate_c_for, hardy_reference, rayleigh_delta, verify_form_bound, FormBoundEstimate,
    TestFamilyKind, TestFunctionFamily, VerifyReport,
};
pub use grid::{Grid, GridScalarField, GridVectorField};
pub use mollify::{mollify_field, mollify_scalar, mollify_spec, MollifierKernel};
pub use orlicz::{gauge_norm, orlicz_modular, GaugeNormResult};
pub use rng::StreamRng;
pub use sde::{
    feller_crosscheck, hitting_scan, simulate, wilson_interval, HittingScan, SdeConfig,
    TrajectoryEnsemble,
};
pub use weights::{weight_bound_check, WeightBoundReport, WeightFamily, WeightKind};
