//! Two-level open quantum systems described by a symmetric non-Hermitian
//! Hamiltonian
//!
//! ```text
//!     H = | ε1  ω  |      ε_i = e_i + (i/2)·γ_i
//!         | ω   ε2 |
//! ```
//!
//! with loss (`γ_i < 0`) and gain (`γ_i > 0`). The crate covers the closed-form
//! spectrum, biorthogonal eigenvectors and phase rigidity, exceptional-point
//! location, the two-resonance S-matrix and its double pole, and parameter
//! sweeps with continuous branch tracking.
//!
//! ```
//! use ep_lab_core::{Complex64, TwoLevelSystem};
//!
//! // equal bare energies, balanced gain/loss, real coupling at the EP
//! let sys = TwoLevelSystem::new(0.5, 0.5, -0.1, 0.1, Complex64::new(0.05, 0.0)).unwrap();
//! assert_eq!(sys.discriminant(), Complex64::new(0.0, 0.0));
//! ```

pub mod eigen;
pub mod ep;
pub mod scenario;
pub mod smatrix;
pub mod sweep;
pub mod system;

pub use num_complex::Complex64;

pub use eigen::{
    coalescence_metric, eigenvectors, mixing_coefficients, phase_rigidity, EigenError, EigenvectorPair,
    MixingTable, Vec2, EP_TOL,
};
pub use ep::{
    classify_branch, ep_newton, eps_gainloss_real_coupling, eps_imaginary_coupling, no_ep_certificate, Branch,
    BranchContext, EpError, EpKind, EpProblem, EpSolution, NoEpCertificate, SearchBox, Unknown,
};
pub use scenario::{preset, Affine, ComplexAffine, ConfigError, Grid, ScenarioConfig, PRESET_NAMES};
pub use smatrix::{
    cross_section, line_shape_features, s_double_pole, s_one, s_two, CrossSectionPoint, LineShapeFeatures,
    Resonance, ResonanceSet, SMatrixError,
};
pub use sweep::{run_sweep, run_sweep_with_threads, track_branches, track_branches_from, SweepError, SweepResult, SweepRow};
pub use system::{SpectralPair, SystemError, TwoLevelSystem};
