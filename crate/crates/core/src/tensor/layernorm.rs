use super::{Matrix, Scalar};
use crate::error::{Error, Result};

pub const DEFAULT_LN_EPSILON: f64 = 1e-6;

/// Per-row layer normalization with learnable scale and shift.
///
/// `out = gamma * (x - mean) / sqrt(var + eps) + beta`, with the population
/// variance taken over the row.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams<S = f32> {
    pub gamma: Vec<S>,
    pub beta: Vec<S>,
    pub epsilon: S,
}

/// Normalized activations and per-row inverse standard deviations saved by
/// the forward pass.
#[derive(Debug, Clone)]
pub struct LayerNormCache<S> {
    normalized: Matrix<S>,
    inv_std: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct LayerNormGrads<S> {
    pub grad_x: Matrix<S>,
    pub grad_gamma: Vec<S>,
    pub grad_beta: Vec<S>,
}

impl<S: Scalar> LayerNormParams<S> {
    /// gamma = 1, beta = 0, default epsilon.
    pub fn new(dim: usize) -> Self {
        Self {
            gamma: vec![S::one(); dim],
            beta: vec![S::zero(); dim],
            epsilon: S::of(DEFAULT_LN_EPSILON),
        }
    }

    pub fn with_epsilon(mut self, epsilon: S) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= S::zero() {
            return Err(Error::Config(format!(
                "layernorm epsilon must be > 0, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward(&self, x: &Matrix<S>) -> Result<(Matrix<S>, LayerNormCache<S>)> {
        let d = self.dim();
        if d == 0 || x.cols() == 0 {
            return Err(Error::EmptyInput("layernorm over zero-width rows".into()));
        }
        if x.cols() != d || self.beta.len() != d {
            return Err(Error::shape("layernorm_forward", x.shape(), (1, d)));
        }
        let inv_d = S::one() / S::of(d as f64);
        let mut normalized = Matrix::zeros(x.rows(), d);
        let mut out = Matrix::zeros(x.rows(), d);
        let mut inv_std = Vec::with_capacity(x.rows());
        for r in 0..x.rows() {
            let row = x.row(r);
            let mean = row.iter().copied().sum::<S>() * inv_d;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<S>() * inv_d;
            let istd = S::one() / (var + self.epsilon).sqrt();
            inv_std.push(istd);
            let nrow = normalized.row_mut(r);
            for (n, &v) in nrow.iter_mut().zip(row) {
                *n = (v - mean) * istd;
            }
            let nrow = normalized.row(r);
            for (j, o) in out.row_mut(r).iter_mut().enumerate() {
                *o = self.gamma[j] * nrow[j] + self.beta[j];
            }
        }
        Ok((
            out,
            LayerNormCache {
                normalized,
                inv_std,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &LayerNormCache<S>,
        grad_out: &Matrix<S>,
    ) -> Result<LayerNormGrads<S>> {
        let d = self.dim();
        if grad_out.shape() != cache.normalized.shape() || d != grad_out.cols() {
            return Err(Error::shape(
                "layernorm_backward",
                cache.normalized.shape(),
                grad_out.shape(),
            ));
        }
        let inv_d = S::one() / S::of(d as f64);
        let mut grad_x = Matrix::zeros(grad_out.rows(), d);
        let mut grad_gamma = vec![S::zero(); d];
        let mut grad_beta = vec![S::zero(); d];
        let mut g_hat = vec![S::zero(); d];
        for r in 0..grad_out.rows() {
            let g = grad_out.row(r);
            let xh = cache.normalized.row(r);
            let mut mean_g = S::zero();
            let mut mean_gx = S::zero();
            for j in 0..d {
                grad_gamma[j] = grad_gamma[j] + g[j] * xh[j];
                grad_beta[j] = grad_beta[j] + g[j];
                g_hat[j] = g[j] * self.gamma[j];
                mean_g = mean_g + g_hat[j];
                mean_gx = mean_gx + g_hat[j] * xh[j];
            }
            mean_g = mean_g * inv_d;
            mean_gx = mean_gx * inv_d;
            let istd = cache.inv_std[r];
            for (j, gx) in grad_x.row_mut(r).iter_mut().enumerate() {
                *gx = istd * (g_hat[j] - mean_g - xh[j] * mean_gx);
            }
        }
        Ok(LayerNormGrads {
            grad_x,
            grad_gamma,
            grad_beta,
        })
    }
}
