//! Entanglement-detection conditions built from entangled projectors.
//!
//! A seed operator (usually a projector onto an entangled ket) is expanded in
//! the product-Pauli basis. Local Clifford conjugations permute that basis up
//! to phases, so repeatedly applying tensor products of per-site `F`/`V`
//! superoperators to the coefficient vector produces a finite orbit of
//! conditions `0 <= <O>_rho <= P_E`, all sharing the separable bound `P_E`
//! (the maximal product-state overlap). Each condition can be tested with a
//! global measurement in an entangled basis or with local mutually unbiased
//! bases; [`plan`] finds the fewest local settings for a given Pauli support.

pub mod catalog;
pub mod clifford;
pub mod error;
pub mod forge;
pub mod geometry;
pub mod operator;
pub mod pauli;
pub mod plan;
pub mod qudit;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Absolute tolerance for matrix identities.
pub const MATRIX_TOL: f64 = 1e-10;
/// Tolerance on negativity when testing positivity.
pub const PSD_TOL: f64 = 1e-9;
