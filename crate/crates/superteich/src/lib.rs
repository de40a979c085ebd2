//! Grassmann-valued coordinates on triangulated punctured surfaces.
//!
//! The crate implements, over an exact finite-generator Grassmann algebra:
//! supermatrix algebra for the group `Psi ⋉ SL(1|2)_0` and its action on the
//! superspace `R^{2,2|4}`, the special light cone and its invariants
//! (lambda-lengths, odd invariants of triples, ratios of quadruples),
//! fatgraph spin structures, the lift of a coordinate vector to the light
//! cone with its holonomy representation, and super Ptolemy flips.

pub mod grassmann;
pub mod lightcone;
pub mod moduli;
pub mod ptolemy;
pub mod superalgebra;
pub mod surface;
pub mod teichmueller;
pub mod verify;

pub use grassmann::{GrassmannNumber, Parity};
pub use lightcone::LightVector;
pub use superalgebra::{GroupElement, SuperMatrix};
pub use surface::{CoordinateVector, Orientation, SurfaceComplex};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("generator pool mismatch: {0} vs {1}")]
    PoolMismatch(u32, u32),
    #[error("element is not invertible (zero body)")]
    NotInvertible,
    #[error("parity error: {0}")]
    Parity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular supermatrix: {0}")]
    Singular(String),
    #[error("projection component error: {0}")]
    Component(String),
    #[error("triple is not positively ordered")]
    Orientation,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invalid surface: {0}")]
    Surface(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported flip: {0}")]
    UnsupportedFlip(String),
    #[error("invalid path: {0}")]
    Path(String),
    #[error("unknown verification suite: {0}")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
