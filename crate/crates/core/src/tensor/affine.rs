use super::{gemm, Matrix, Scalar};
use crate::error::{Error, Result};

/// Square fully connected layer, `out[r] = x[r] · weightᵀ + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer<S = f32> {
    pub weight: Matrix<S>,
    pub bias: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct AffineGrads<S> {
    pub grad_x: Matrix<S>,
    pub grad_weight: Matrix<S>,
    pub grad_bias: Vec<S>,
}

impl<S: Scalar> AffineLayer<S> {
    pub fn new(weight: Matrix<S>, bias: Vec<S>) -> Result<Self> {
        if weight.rows() != weight.cols() {
            return Err(Error::shape(
                "affine (square weight)",
                weight.shape(),
                weight.shape(),
            ));
        }
        if bias.len() != weight.rows() {
            return Err(Error::shape("affine bias", weight.shape(), (1, bias.len())));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(dim, dim),
            bias: vec![S::zero(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            weight: Matrix::identity(dim),
            bias: vec![S::zero(); dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.bias.len()
    }

    pub fn forward(&self, x: &Matrix<S>) -> Result<Matrix<S>> {
        if x.cols() != self.dim() {
            return Err(Error::shape(
                "affine_forward",
                x.shape(),
                self.weight.shape(),
            ));
        }
        let mut out = gemm(x, false, &self.weight, true)?;
        for r in 0..out.rows() {
            for (o, &b) in out.row_mut(r).iter_mut().zip(&self.bias) {
                *o = *o + b;
            }
        }
        Ok(out)
    }

    pub fn backward(&self, x: &Matrix<S>, grad_out: &Matrix<S>) -> Result<AffineGrads<S>> {
        if x.cols() != self.dim() {
            return Err(Error::shape(
                "affine_backward",
                x.shape(),
                self.weight.shape(),
            ));
        }
        if grad_out.shape() != x.shape() {
            return Err(Error::shape("affine_backward", x.shape(), grad_out.shape()));
        }
        Ok(AffineGrads {
            grad_x: gemm(grad_out, false, &self.weight, false)?,
            grad_weight: gemm(grad_out, true, x, false)?,
            grad_bias: grad_out.column_sums(),
        })
    }
}
