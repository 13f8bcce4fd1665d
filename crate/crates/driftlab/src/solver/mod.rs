//! Finite-difference machinery for the parabolic and resolvent problems on
//! the Dirichlet box, plus the certificate checks that the analysis
//! guarantees for form-bounded drifts.

pub mod cauchy;
pub mod certificates;
pub mod evolve;
pub mod residual;
pub mod resolvent;
pub mod trotter;

pub use cauchy::{semigroup_cauchy, CauchyReport};
pub use certificates::{
    norm_certificates, orlicz_energy_certificate, smoothing_slope, CertificateRow,
    NormCertificateReport, OrliczCertificateReport, SlopeFit,
};
pub use evolve::{evolve, DriftMeta, EvolutionConfig, SemigroupRun, Stepper};
pub use residual::{weak_solution_residual, ResidualReport, SpaceTimeTest};
pub use resolvent::{resolvent_contraction, solve_resolvent, ResolventOp};
pub use trotter::{trotter_conditions, TrotterReport};
