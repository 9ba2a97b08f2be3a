//! Exceptional points of maximal order in discrete PT-symmetric lattice models.
//!
//! The crate builds the tridiagonal Hamiltonians `H = Δ + V(A, B, …)` with a
//! purely imaginary, mirror-antisymmetric potential, locates the couplings at
//! which all `N` eigenvalues and eigenvectors coalesce at `E = 0` (an EPN),
//! certifies the resulting Jordan block, constructs positive-definite
//! physical metrics and maps the parameter domain where the spectrum stays
//! real and simple.
//!
//! The pipeline is split into small modules:
//!
//! - [`model`]: lattice Hamiltonians and their symmetries.
//! - [`polyalg`]: exact polynomial arithmetic, resultants, real root isolation.
//! - [`charpoly`]: the secular polynomial and the EPN condition system.
//! - [`ep_finder`]: elimination, back-substitution and root selection.
//! - [`spectral`]: dense eigen-solvers and spectrum classification.
//! - [`jordan`]: Jordan chains and transition matrices.
//! - [`metric`]: quasi-Hermitian metrics.
//! - [`domain`]: parameter-space scans and the `N = 4` corridor.
//! - [`emit`]: deterministic CSV / JSON output.

pub mod charpoly;
pub mod domain;
pub mod emit;
pub mod ep_finder;
mod error;
pub mod golden;
pub mod jordan;
pub mod metric;
pub mod model;
pub mod polyalg;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{ComplexMatrix, CouplingVector};
