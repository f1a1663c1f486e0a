//! Adam with bias correction and a single-drop learning-rate schedule.

use crate::error::{Error, Result};
use crate::model::SiMlpeParams;
use crate::tensor::Scalar;

/// Piecewise-constant learning rate: `initial_lr` before `drop_step`,
/// `final_lr` from then on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub initial_lr: f64,
    pub final_lr: f64,
    pub drop_step: usize,
    pub total_steps: usize,
}

impl Default for LrSchedule {
    /// 35k steps at 3e-4, dropping to 1e-5 at step 30k.
    fn default() -> Self {
        Self {
            initial_lr: 3e-4,
            final_lr: 1e-5,
            drop_step: 30_000,
            total_steps: 35_000,
        }
    }
}

impl LrSchedule {
    /// 115k steps, dropping at 100k.
    pub fn long() -> Self {
        Self {
            drop_step: 100_000,
            total_steps: 115_000,
            ..Self::default()
        }
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        if step < self.drop_step {
            self.initial_lr
        } else {
            self.final_lr
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.initial_lr) || !ok(self.final_lr) {
            return Err(Error::Config(format!(
                "learning rates must be positive, got {} and {}",
                self.initial_lr, self.final_lr
            )));
        }
        if self.total_steps == 0 {
            return Err(Error::Config("total_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates mirroring the parameter tensors one-to-one.
#[derive(Debug, Clone)]
pub struct AdamState<S> {
    pub step: usize,
    pub config: AdamConfig,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(params: &SiMlpeParams<S>, config: AdamConfig) -> Self {
        let zeros = || {
            params
                .tensors()
                .iter()
                .map(|t| vec![S::zero(); t.len()])
                .collect()
        };
        Self {
            step: 0,
            config,
            m: zeros(),
            v: zeros(),
        }
    }

    /// Updates `params` in place:
    /// `m ← β₁m + (1−β₁)g`, `v ← β₂v + (1−β₂)g²`, `θ ← θ − lr·m̂/(√v̂ + ε)`.
    pub fn step(
        &mut self,
        params: &mut SiMlpeParams<S>,
        grads: &SiMlpeParams<S>,
        lr: f64,
    ) -> Result<()> {
        let grads = grads.tensors();
        let mut targets = params.tensors_mut();
        if targets.len() != self.m.len()
            || grads.len() != self.m.len()
            || targets
                .iter()
                .zip(&grads)
                .zip(&self.m)
                .any(|((p, g), m)| p.len() != m.len() || g.len() != m.len())
        {
            return Err(Error::shape(
                "adam_step",
                (self.m.len(), self.m.iter().map(Vec::len).sum()),
                (grads.len(), grads.iter().map(|g| g.len()).sum()),
            ));
        }
        self.step += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let t = self.step as i32;
        let bc1 = S::of(1.0 - beta1.powi(t));
        let bc2 = S::of(1.0 - beta2.powi(t));
        let (b1, b2) = (S::of(beta1), S::of(beta2));
        let (one, lr, eps) = (S::one(), S::of(lr), S::of(eps));
        for (((theta, g), m), v) in targets
            .iter_mut()
            .zip(&grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..theta.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] = theta[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
