//! Dense 2-D tensors and the differentiable primitives used by the model.
//!
//! Every layer acts along the column (last) axis of a row-major matrix, row
//! by row. Changing which axis a layer mixes is done only through an
//! explicit [`Matrix::transpose`] (or [`Matrix::block_transpose`] for a
//! stacked batch).

mod affine;
mod fdcheck;
mod layernorm;
mod matrix;
mod scalar;

pub use affine::{AffineGrads, AffineLayer};
pub use fdcheck::fd_check;
pub use layernorm::{LayerNormCache, LayerNormGrads, LayerNormParams, DEFAULT_LN_EPSILON};
pub use matrix::{gemm, Matrix};
pub use scalar::Scalar;
