//! Gaussian-state simulation of a pulse-pumped, unbalanced SU(1,1)
//! interferometer and of its beam-splitter counterpart.
//!
//! States are tracked through complex-basis covariance matrices. The crate
//! builds the multi-mode output states operator by operator, provides their
//! closed forms, computes photon-number statistics and quadrature variances,
//! classifies PPT entanglement over bipartitions, and includes a truncated
//! Fock-space simulator for cross-checking at small gain.
//!
//! Mode indices are 1-based throughout the public API.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod golden;
pub mod interferometer;
pub mod photon;

pub use analytic::{analytic_state, crosscheck};
pub use entanglement::{
    classify_negativity, enumerate_bipartitions, log_min_ppt, min_quad_variance, partial_transpose,
    ppt_rearrange, quad_lc_variance, scan_lmu, structural_negativity_hint, symplectic_eigenvalues,
    Axis, Bipartition, Grid, LmuPoint, LmuScan, NegativityVerdict, ScanSpec, ScanTarget,
    SymplecticSpectrum, Verdict, NEGATIVITY_EPS,
};
pub use error::{Error, Result};
pub use fock::{
    fock_bs, fock_cm, fock_family, fock_tmsq, fock_vacuum, FockRun, FockState, TwoModeGate,
};
pub use gaussian::{
    bs_matrix, tmsq_matrix, CMatrix, GaussianState, QuadratureCm, RMatrix, SymplecticOp,
};
pub use golden::golden_ppt_verdicts;
pub use interferometer::{
    bs_schedule, build_balanced_su11, build_family, build_rho, build_rho_bs, build_rho_bs_s,
    build_rho_s, mode_index, su11_schedule, Channel, FamilyTag, Gains, InterferometerParams,
    PumpKind, PumpSchedule, PumpStep,
};
pub use photon::{
    closed_form_photon_stats, mean_photons, photon_covariance, photon_lc_variance, PhotonCovariance,
};

pub use num_complex::Complex64;
