//! Optical tomograms of single-mode photon states and tomographic checks of
//! the Heisenberg and state-extended (Trifonov) uncertainty relations.
//!
//! The crate is organized bottom-up:
//!
//! - [`states`]: Gaussian, Fock-superposition, and mixed states with
//!   closed-form moments and characteristic functions.
//! - [`tomography`]: optical tomograms w(X, θ), their grids and CSV form,
//!   symplectic rescaling, and row characteristic functions.
//! - [`moments`]: means and variances extracted from tomogram rows.
//! - [`inequalities`]: Heisenberg and Trifonov checks, phase sweeps.
//! - [`purity`]: the tomographic overlap functional and pure/mixed labels.
//! - [`homodyne`]: seeded homodyne sampling and statistical re-estimation.

// Comparisons are negated on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hermite;
pub mod homodyne;
pub mod inequalities;
pub mod moments;
pub mod purity;
pub mod quadrature;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use homodyne::{HomodyneDataset, MomentEstimate};
pub use inequalities::{InequalityKind, InequalityReport};
pub use purity::{Classification, PurityReport, TomogramSource};
pub use states::{MixedStateSpec, MomentSet, PureStateSpec, StateSpec};
pub use tomography::{SymplecticQuery, TomogramGrid, XGrid};
