//! Spherically homogeneous sparse trees and the spectral theory of their
//! Laplacians.
//!
//! The crate builds trees of type `{L_n, k_n}`, assembles their truncated
//! Laplacians, splits them exactly into a direct sum of Jacobi matrices, and
//! runs transfer-matrix / EFGP dynamics to test predictions about the
//! spectral type and local dimension of the resulting operators.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations. Integer quantities (generations,
//! vertex counts, multiplicities) are exact big integers throughout.

// Preconditions are written `!(x < bound)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bigmath;
pub mod cli;
pub mod efgp;
pub mod eigen;
pub mod error;
pub mod jacobi;
pub mod montecarlo;
pub mod operator;
pub mod phase;
pub mod scalar;
pub mod spectral;
pub mod transfer;
pub mod tree;

pub use bigmath::Gamma;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tree::TreeSpec;

pub type SymOperatorF64 = operator::SymOperator<f64>;
pub type SymOperatorF32 = operator::SymOperator<f32>;
pub type Mat2F64 = transfer::Mat2<f64>;
pub type Mat2F32 = transfer::Mat2<f32>;
pub type ScaledMat2F64 = transfer::ScaledMat2<f64>;
pub type ScaledMat2F32 = transfer::ScaledMat2<f32>;
pub type JacobiCoefficientsF64 = jacobi::JacobiCoefficients<f64>;
pub type JacobiCoefficientsF32 = jacobi::JacobiCoefficients<f32>;
pub type EfgpTrajectoryF64 = efgp::EfgpTrajectory<f64>;
pub type EfgpTrajectoryF32 = efgp::EfgpTrajectory<f32>;
