use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Architecture, ModelConfig};
use crate::error::{Error, Result};
use crate::tensor::{AffineLayer, LayerNormParams, Matrix, Scalar};

/// One temporal FC followed by an optional layer norm.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpBlock<S = f32> {
    pub fc: AffineLayer<S>,
    pub ln: Option<LayerNormParams<S>>,
}

/// Every learnable weight of a model.
///
/// For the one-FC baseline the spatial heads are absent and `blocks` holds
/// the single temporal FC (no layer norm, no skip connection). The same type
/// doubles as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct SiMlpeParams<S = f32> {
    pub fc_in: Option<AffineLayer<S>>,
    pub fc_out: Option<AffineLayer<S>>,
    pub blocks: Vec<MlpBlock<S>>,
}

impl<S: Scalar> SiMlpeParams<S> {
    /// Seeded initialization.
    ///
    /// `fc_in` and block FC weights are uniform in `±sqrt(6 / (fan_in + fan_out))`
    /// with zero bias; layer norms start at gamma = 1, beta = 0. `fc_out` (and
    /// the one-FC layer) is exactly zero so the untrained model predicts a zero
    /// residual. Draws are made in f64 so both precisions share one stream.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |dim: usize| {
            let bound = (6.0 / (2 * dim) as f64).sqrt();
            AffineLayer {
                weight: Matrix::from_fn(dim, dim, |_, _| S::of(rng.gen_range(-bound..bound))),
                bias: vec![S::zero(); dim],
            }
        };
        Ok(match config.arch {
            Architecture::OneFc => Self {
                fc_in: None,
                fc_out: None,
                blocks: vec![MlpBlock {
                    fc: AffineLayer::zeros(config.input_len),
                    ln: None,
                }],
            },
            Architecture::SiMlpe => {
                let fc_in = glorot(config.channels);
                let d = config.block_dim();
                let blocks = (0..config.num_blocks)
                    .map(|_| MlpBlock {
                        fc: glorot(d),
                        ln: config.use_layernorm.then(|| LayerNormParams::new(d)),
                    })
                    .collect();
                Self {
                    fc_in: Some(fc_in),
                    fc_out: Some(AffineLayer::zeros(config.channels)),
                    blocks,
                }
            }
        })
    }

    /// All-zero tensors with the layout `config` implies.
    pub fn zeros(config: &ModelConfig) -> Self {
        let c = config.channels;
        let d = config.block_dim();
        let heads = config.has_heads();
        let n = if heads { config.num_blocks } else { 1 };
        let zero_ln = |d: usize| LayerNormParams {
            gamma: vec![S::zero(); d],
            beta: vec![S::zero(); d],
            epsilon: S::of(crate::tensor::DEFAULT_LN_EPSILON),
        };
        Self {
            fc_in: heads.then(|| AffineLayer::zeros(c)),
            fc_out: heads.then(|| AffineLayer::zeros(c)),
            blocks: (0..n)
                .map(|_| MlpBlock {
                    fc: AffineLayer::zeros(d),
                    ln: (heads && config.use_layernorm).then(|| zero_ln(d)),
                })
                .collect(),
        }
    }

    /// Parameter arrays in declaration order: fc_in (weight, bias), fc_out
    /// (weight, bias), then per block fc (weight, bias) and ln (gamma, beta).
    pub fn tensors(&self) -> Vec<&[S]> {
        let mut out: Vec<&[S]> = Vec::new();
        for head in [&self.fc_in, &self.fc_out].into_iter().flatten() {
            out.push(head.weight.data());
            out.push(&head.bias);
        }
        for b in &self.blocks {
            out.push(b.fc.weight.data());
            out.push(&b.fc.bias);
            if let Some(ln) = &b.ln {
                out.push(&ln.gamma);
                out.push(&ln.beta);
            }
        }
        out
    }

    /// Mutable view in the same order as [`tensors`](Self::tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut [S]> {
        let mut out: Vec<&mut [S]> = Vec::new();
        for head in [&mut self.fc_in, &mut self.fc_out].into_iter().flatten() {
            out.push(head.weight.data_mut());
            out.push(&mut head.bias);
        }
        for b in &mut self.blocks {
            out.push(b.fc.weight.data_mut());
            out.push(&mut b.fc.bias);
            if let Some(ln) = &mut b.ln {
                out.push(&mut ln.gamma);
                out.push(&mut ln.beta);
            }
        }
        out
    }

    /// Number of learnable scalars, counted by walking the structure.
    pub fn scalar_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<S> {
        self.tensors().concat()
    }

    /// Overwrites every parameter from a flat vector in declaration order.
    pub fn assign_flat(&mut self, flat: &[S]) -> Result<()> {
        if flat.len() != self.scalar_count() {
            return Err(Error::shape(
                "assign_flat",
                (1, self.scalar_count()),
                (1, flat.len()),
            ));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        Ok(())
    }

    /// Fails unless every tensor has the shape `config` implies.
    pub fn check_layout(&self, config: &ModelConfig) -> Result<()> {
        let expect = Self::zeros(config);
        let ours = self.tensors();
        let theirs = expect.tensors();
        let same_heads = self.fc_in.is_some() == expect.fc_in.is_some()
            && self.fc_out.is_some() == expect.fc_out.is_some()
            && self.blocks.len() == expect.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&expect.blocks)
                .all(|(a, b)| a.ln.is_some() == b.ln.is_some());
        if !same_heads
            || ours.len() != theirs.len()
            || ours.iter().zip(&theirs).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::Config(format!(
                "parameter layout does not match {config:?}"
            )));
        }
        Ok(())
    }

    pub fn cast<T: Scalar>(&self) -> SiMlpeParams<T> {
        let affine = |a: &AffineLayer<S>| AffineLayer {
            weight: a.weight.cast(),
            bias: a.bias.iter().map(|v| T::of(v.f64())).collect(),
        };
        let conv = |v: &[S]| v.iter().map(|x| T::of(x.f64())).collect::<Vec<T>>();
        SiMlpeParams {
            fc_in: self.fc_in.as_ref().map(affine),
            fc_out: self.fc_out.as_ref().map(affine),
            blocks: self
                .blocks
                .iter()
                .map(|b| MlpBlock {
                    fc: affine(&b.fc),
                    ln: b.ln.as_ref().map(|ln| LayerNormParams {
                        gamma: conv(&ln.gamma),
                        beta: conv(&ln.beta),
                        epsilon: T::of(ln.epsilon.f64()),
                    }),
                })
                .collect(),
        }
    }
}
