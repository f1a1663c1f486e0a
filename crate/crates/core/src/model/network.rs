use super::{ModelConfig, SiMlpeParams};
use crate::dct::DctBasis;
use crate::error::{Error, Result};
use crate::tensor::{LayerNormCache, Matrix, Scalar};

/// Future poses predicted from one input window.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<S = f32> {
    /// N×C absolute poses, `residual + last input frame`.
    pub absolute: Matrix<S>,
    /// N×C network output before the last frame is added back.
    pub residual: Matrix<S>,
}

/// Activations kept by [`Model::forward_batch`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<S> {
    config: ModelConfig,
    batch: usize,
    head_input: Option<Matrix<S>>,
    block_inputs: Vec<Matrix<S>>,
    ln_caches: Vec<Option<LayerNormCache<S>>>,
    tail_input: Option<Matrix<S>>,
}

impl<S> ForwardCache<S> {
    pub fn batch(&self) -> usize {
        self.batch
    }
}

#[derive(Debug, Clone)]
pub struct Gradients<S> {
    pub params: SiMlpeParams<S>,
    /// Gradient with respect to each T×C input window.
    pub inputs: Vec<Matrix<S>>,
}

/// Network configuration, weights and the cached DCT basis.
///
/// Pipeline for the MLP model: DCT, `fc_in` along C, transpose, n × (`y +
/// LN(FC(y))`) along T, transpose back, `fc_out` along C, IDCT, keep the
/// first N rows, add the last observed frame. The one-FC baseline keeps only
/// the DCT/transpose scaffolding around a single temporal FC.
#[derive(Debug, Clone)]
pub struct Model<S: Scalar = f32> {
    config: ModelConfig,
    params: SiMlpeParams<S>,
    dct: DctBasis<S>,
}

impl<S: Scalar> Model<S> {
    pub fn new(config: ModelConfig, params: SiMlpeParams<S>) -> Result<Self> {
        config.validate()?;
        params.check_layout(&config)?;
        Ok(Self {
            config,
            params,
            dct: DctBasis::new(config.input_len)?,
        })
    }

    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        let params = SiMlpeParams::init(&config, seed)?;
        Self::new(config, params)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &SiMlpeParams<S> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut SiMlpeParams<S> {
        &mut self.params
    }

    pub fn into_params(self) -> SiMlpeParams<S> {
        self.params
    }

    pub fn dct(&self) -> &DctBasis<S> {
        &self.dct
    }

    /// Learnable scalars, counted from the actual tensors.
    pub fn param_count(&self) -> usize {
        self.params.scalar_count()
    }

    pub fn cast<T: Scalar>(&self) -> Result<Model<T>> {
        Model::new(self.config, self.params.cast())
    }

    pub fn forward(&self, x: &Matrix<S>) -> Result<(Prediction<S>, ForwardCache<S>)> {
        let (mut preds, cache) = self.forward_batch(std::slice::from_ref(x))?;
        Ok((preds.pop().expect("batch of one"), cache))
    }

    /// Prediction without keeping activations around.
    pub fn predict(&self, x: &Matrix<S>) -> Result<Prediction<S>> {
        self.forward(x).map(|(p, _)| p)
    }

    /// Runs a batch of T×C windows through the network at once by stacking
    /// them vertically; every row-wise layer then sees one tall matrix.
    pub fn forward_batch(&self, xs: &[Matrix<S>]) -> Result<(Vec<Prediction<S>>, ForwardCache<S>)> {
        let cfg = &self.config;
        let (t, c, n) = (cfg.input_len, cfg.channels, cfg.output_len);
        if xs.is_empty() {
            return Err(Error::EmptyInput("forward on an empty batch".into()));
        }
        for x in xs {
            if x.shape() != (t, c) {
                return Err(Error::shape("forward", (t, c), x.shape()));
            }
            if !x.is_finite() {
                return Err(Error::NonFinite("model input".into()));
            }
        }

        let stacked = Matrix::vstack(xs)?;
        let mut y = if cfg.use_dct {
            self.dct.apply_dct_stacked(&stacked)?
        } else {
            stacked
        };

        let mut head_input = None;
        if let Some(fc_in) = &self.params.fc_in {
            let out = fc_in.forward(&y)?;
            head_input = Some(std::mem::replace(&mut y, out));
        }
        if cfg.use_transpose {
            y = y.block_transpose(t)?;
        }

        let skip = cfg.has_heads();
        let mut block_inputs = Vec::with_capacity(self.params.blocks.len());
        let mut ln_caches = Vec::with_capacity(self.params.blocks.len());
        for block in &self.params.blocks {
            let h = block.fc.forward(&y)?;
            let (h, ln_cache) = match &block.ln {
                Some(ln) => {
                    let (out, cache) = ln.forward(&h)?;
                    (out, Some(cache))
                }
                None => (h, None),
            };
            let next = if skip { y.add(&h)? } else { h };
            block_inputs.push(std::mem::replace(&mut y, next));
            ln_caches.push(ln_cache);
        }

        if cfg.use_transpose {
            y = y.block_transpose(c)?;
        }
        let mut tail_input = None;
        if let Some(fc_out) = &self.params.fc_out {
            let out = fc_out.forward(&y)?;
            tail_input = Some(std::mem::replace(&mut y, out));
        }
        let z = if cfg.use_dct {
            self.dct.apply_idct_stacked(&y)?
        } else {
            y
        };

        let preds = xs
            .iter()
            .enumerate()
            .map(|(b, x)| {
                let residual = z.slice_rows(b * t, n)?;
                let last = x.row(t - 1);
                let mut absolute = residual.clone();
                for r in 0..n {
                    for (a, &l) in absolute.row_mut(r).iter_mut().zip(last) {
                        *a = *a + l;
                    }
                }
                Ok(Prediction { absolute, residual })
            })
            .collect::<Result<Vec<_>>>()?;

        let cache = ForwardCache {
            config: self.config,
            batch: xs.len(),
            head_input,
            block_inputs,
            ln_caches,
            tail_input,
        };
        Ok((preds, cache))
    }

    /// Exact gradients of `sum_b <grad_absolute[b], prediction[b].absolute>`
    /// with respect to every parameter and every input window.
    pub fn backward(
        &self,
        cache: &ForwardCache<S>,
        grad_absolute: &[Matrix<S>],
    ) -> Result<Gradients<S>> {
        let cfg = &self.config;
        let (t, c, n) = (cfg.input_len, cfg.channels, cfg.output_len);
        if cache.config != self.config || cache.block_inputs.len() != self.params.blocks.len() {
            return Err(Error::Usage(
                "forward cache belongs to a different model".into(),
            ));
        }
        if grad_absolute.len() != cache.batch {
            return Err(Error::Usage(format!(
                "cache holds a batch of {}, got {} gradients",
                cache.batch,
                grad_absolute.len()
            )));
        }
        for g in grad_absolute {
            if g.shape() != (n, c) {
                return Err(Error::shape("backward", (n, c), g.shape()));
            }
        }
        let batch = cache.batch;
        let mut grads = SiMlpeParams::zeros(cfg);

        // Rows N..T of the raw output are discarded, so their gradient is zero.
        let mut g = Matrix::zeros(batch * t, c);
        for (b, ga) in grad_absolute.iter().enumerate() {
            for r in 0..n {
                g.row_mut(b * t + r).copy_from_slice(ga.row(r));
            }
        }
        if cfg.use_dct {
            // IDCT is z = D⁻¹ y, so dL/dy = (D⁻¹)ᵀ dL/dz = D dL/dz.
            g = g.block_left_matmul(self.dct.forward())?;
        }

        if let (Some(fc_out), Some(input)) = (&self.params.fc_out, &cache.tail_input) {
            let ag = fc_out.backward(input, &g)?;
            let slot = grads.fc_out.as_mut().expect("layout checked");
            slot.weight = ag.grad_weight;
            slot.bias = ag.grad_bias;
            g = ag.grad_x;
        }
        if cfg.use_transpose {
            g = g.block_transpose(t)?;
        }

        let skip = cfg.has_heads();
        for (i, block) in self.params.blocks.iter().enumerate().rev() {
            let mut g_h = g.clone();
            if let (Some(ln), Some(ln_cache)) = (&block.ln, &cache.ln_caches[i]) {
                let lg = ln.backward(ln_cache, &g_h)?;
                let slot = grads.blocks[i].ln.as_mut().expect("layout checked");
                slot.gamma = lg.grad_gamma;
                slot.beta = lg.grad_beta;
                g_h = lg.grad_x;
            }
            let ag = block.fc.backward(&cache.block_inputs[i], &g_h)?;
            grads.blocks[i].fc.weight = ag.grad_weight;
            grads.blocks[i].fc.bias = ag.grad_bias;
            g = if skip { g.add(&ag.grad_x)? } else { ag.grad_x };
        }

        if cfg.use_transpose {
            g = g.block_transpose(c)?;
        }
        if let (Some(fc_in), Some(input)) = (&self.params.fc_in, &cache.head_input) {
            let ag = fc_in.backward(input, &g)?;
            let slot = grads.fc_in.as_mut().expect("layout checked");
            slot.weight = ag.grad_weight;
            slot.bias = ag.grad_bias;
            g = ag.grad_x;
        }
        if cfg.use_dct {
            // DCT is y = D x, so dL/dx = Dᵀ dL/dy = D⁻¹ dL/dy.
            g = g.block_left_matmul(self.dct.inverse())?;
        }

        let mut inputs = g.split_rows(t)?;
        for (gi, ga) in inputs.iter_mut().zip(grad_absolute) {
            let sums = ga.column_sums();
            for (v, s) in gi.row_mut(t - 1).iter_mut().zip(sums) {
                *v = *v + s;
            }
        }
        Ok(Gradients {
            params: grads,
            inputs,
        })
    }
}
