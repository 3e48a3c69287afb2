//! Deformed Fourier magic-unitary matrix models and the law of their main
//! character.
//!
//! The crate builds the projective models `W = U ⊗_Q V` obtained from two
//! finite abelian groups `X`, `Y` and a phase matrix `Q`, and computes the
//! moments `∫χ^p` of the main character by independent routes:
//!
//! * spectral and Cesàro evaluation of transfer matrices ([`moments`]),
//! * exact enumeration of multiset walks and of identity words in the
//!   semidirect product `Z^{(|X|-1)|Y|} ⋊ Y` ([`gamma`]),
//! * Monte Carlo integration of Gram matrices over the torus ([`montecarlo`]),
//!
//! together with the noncrossing-partition asymptotics and the limiting
//! free Poisson shape ([`freeprob`]).

pub mod error;
pub mod freeprob;
pub mod gamma;
pub mod groups;
pub mod hadamard;
pub mod linalg;
pub mod models;
pub mod moments;
pub mod montecarlo;
pub mod verify;

pub use error::{Error, Result};
pub use groups::{AbelianGroup, GroupElt};
pub use hadamard::{HadamardMatrix, PhaseMatrix, Side};
pub use models::MagicModel;
pub use moments::{ExponentWord, Limits, MomentReport, TransferMatrix};

/// Tolerance for identities that hold by construction.
pub const TOL_CONSTRUCTION: f64 = 1e-12;
/// Tolerance for projection, magic and Hadamard checks.
pub const TOL_STRUCTURE: f64 = 1e-9;
/// Tolerance for spectral decisions (eigenvalue-1 detection).
pub const TOL_SPECTRAL: f64 = 1e-6;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
