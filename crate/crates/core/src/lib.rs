//! Polarization analysis of convolutional polar kernels.
//!
//! The crate computes, for the convolutional polarizing transformation
//! `Q(n)` and its row-permuted variants:
//!
//! * the generalized polarization behaviour (per-phase, per-subspace weight
//!   enumerators of erasure configurations) by a polynomial-time recursion,
//! * the polarization behaviour, partial distances and polarization rate,
//! * the BEC scaling exponent, via the dominant eigenvalue of the
//!   polarization operator,
//!
//! together with an exhaustive enumeration [`oracle`] that computes the same
//! quantities straight from their definitions for any small kernel.

pub mod error;
pub mod gf2;
pub mod gpb;
pub mod kernels;
pub mod oracle;
pub mod pb;
pub mod scaling;
pub mod subspaces;
pub mod weight_enum;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use gpb::{Gpb, Source, TransformTables};
pub use kernels::{Family, Kernel};
pub use oracle::{ErasureConfig, OracleOptions};
pub use pb::{PartialDistanceProfile, Pb};
pub use scaling::{Interpolation, ScalingConfig, ScalingResult};
pub use subspaces::Subspace3;
pub use weight_enum::WeightEnum;
