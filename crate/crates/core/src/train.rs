//! Mini-batch Adam training.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{derive_seed, WindowSet};
use crate::error::{Error, Result};
use crate::loss::{total_loss, LossWeights};
use crate::model::{Model, ModelConfig};
use crate::optim::{AdamConfig, AdamState, LrSchedule};
use crate::tensor::{Matrix, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub schedule: LrSchedule,
    pub weights: LossWeights,
    pub adam: AdamConfig,
    pub batch_size: usize,
    /// Seeds parameter init and batch sampling.
    pub seed: u64,
    /// Record the loss every this many steps (the last step is always recorded).
    pub log_every: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            schedule: LrSchedule::default(),
            weights: LossWeights::default(),
            adam: AdamConfig::default(),
            batch_size: 256,
            seed: 0,
            log_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    pub lr: f64,
    pub total: f64,
    pub re: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub records: Vec<LossRecord>,
}

impl LossTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,lr,loss_total,loss_re,loss_v\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{},{}", r.step, r.lr, r.total, r.re, r.v);
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn first(&self) -> Option<&LossRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&LossRecord> {
        self.records.last()
    }
}

/// Mean loss over a batch and the matching per-window gradients.
pub(crate) fn batch_loss<S: Scalar>(
    model: &Model<S>,
    inputs: &[Matrix<S>],
    targets: &[Matrix<S>],
    weights: &LossWeights,
) -> Result<(LossRecord, crate::model::Gradients<S>)> {
    let (preds, cache) = model.forward_batch(inputs)?;
    let scale = S::one() / S::of(inputs.len() as f64);
    let mut rec = LossRecord {
        step: 0,
        lr: 0.0,
        total: 0.0,
        re: 0.0,
        v: 0.0,
    };
    let mut grads = Vec::with_capacity(inputs.len());
    for (p, gt) in preds.iter().zip(targets) {
        let (val, g) = total_loss(weights, &p.absolute, gt)?;
        rec.total += val.total.f64();
        rec.re += val.re.f64();
        rec.v += val.v.f64();
        grads.push(g.scale(scale));
    }
    let n = inputs.len() as f64;
    rec.total /= n;
    rec.re /= n;
    rec.v /= n;
    let grads = model.backward(&cache, &grads)?;
    Ok((rec, grads))
}

/// Initializes a model from `opts.seed` and trains it.
pub fn train<S: Scalar>(
    config: ModelConfig,
    data: &WindowSet,
    opts: &TrainOptions,
) -> Result<(Model<S>, LossTrace)> {
    let model = Model::init(config, opts.seed)?;
    train_model(model, data, opts)
}

/// Runs `opts.schedule.total_steps` Adam steps on batches drawn uniformly
/// with replacement from `data`.
pub fn train_model<S: Scalar>(
    mut model: Model<S>,
    data: &WindowSet,
    opts: &TrainOptions,
) -> Result<(Model<S>, LossTrace)> {
    let cfg = *model.config();
    opts.schedule.validate()?;
    if data.is_empty() {
        return Err(Error::Config("training data yields no windows".into()));
    }
    if opts.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    if data.channels() != Some(cfg.channels) {
        return Err(Error::Config(format!(
            "data has {:?} channels, model expects {}",
            data.channels(),
            cfg.channels
        )));
    }
    if data.input_len() != cfg.input_len || data.target_len() != cfg.output_len {
        return Err(Error::Config(format!(
            "data windows are {}+{} frames, model expects {}+{}",
            data.input_len(),
            data.target_len(),
            cfg.input_len,
            cfg.output_len
        )));
    }

    let mut sampler = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 1));
    let mut adam = AdamState::new(model.params(), opts.adam);
    let mut trace = LossTrace::default();
    let total = opts.schedule.total_steps;
    let log_every = opts.log_every.max(1);

    for step in 0..total {
        let mut inputs = Vec::with_capacity(opts.batch_size);
        let mut targets = Vec::with_capacity(opts.batch_size);
        for _ in 0..opts.batch_size {
            let s = data.sample::<S>(sampler.gen_range(0..data.len()))?;
            inputs.push(s.input);
            targets.push(s.target);
        }
        let (mut rec, grads) = batch_loss(&model, &inputs, &targets, &opts.weights)?;
        if !rec.total.is_finite() {
            return Err(Error::NonFinite(format!("training loss at step {step}")));
        }
        let lr = opts.schedule.lr_at(step);
        if step % log_every == 0 || step + 1 == total {
            rec.step = step;
            rec.lr = lr;
            trace.records.push(rec);
        }
        adam.step(model.params_mut(), &grads.params, lr)?;
    }
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_set, MotionSequence, SyntheticSpec};

    fn small_opts(steps: usize) -> TrainOptions {
        TrainOptions {
            schedule: LrSchedule {
                initial_lr: 1e-3,
                final_lr: 1e-4,
                drop_step: steps * 3 / 4,
                total_steps: steps,
            },
            batch_size: 8,
            seed: 5,
            log_every: 10,
            ..Default::default()
        }
    }

    fn small_data() -> WindowSet {
        let spec = SyntheticSpec {
            num_joints: 2,
            num_frames: 80,
            ..Default::default()
        };
        WindowSet::new(generate_synthetic_set(&spec, 3).unwrap(), 8, 3, 1).unwrap()
    }

    #[test]
    fn static_data_is_a_fixed_point() {
        let seq = MotionSequence::new(25.0, 2, vec![4.0; 6 * 40]).unwrap();
        let data = WindowSet::new(vec![seq], 8, 3, 1).unwrap();
        let cfg = ModelConfig::new(6).with_lengths(8, 3).with_blocks(2);
        let (_, trace) = train::<f32>(cfg, &data, &small_opts(30)).unwrap();
        assert!(trace.records.iter().all(|r| r.total == 0.0));
    }

    #[test]
    fn deterministic_and_finite() {
        let cfg = ModelConfig::new(6).with_lengths(8, 3).with_blocks(2);
        let data = small_data();
        let (a, ta) = train::<f32>(cfg, &data, &small_opts(40)).unwrap();
        let (b, tb) = train::<f32>(cfg, &data, &small_opts(40)).unwrap();
        assert_eq!(ta, tb);
        let bits = |m: &Model<f32>| {
            m.params()
                .flatten()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        assert!(ta.records.iter().all(|r| r.total.is_finite()));
        assert_eq!(ta.records.len(), 5);
        assert_eq!(ta.last().unwrap().step, 39);
    }

    #[test]
    fn loss_decreases_on_smooth_motion() {
        let cfg = ModelConfig::new(6).with_lengths(8, 3).with_blocks(2);
        let mut opts = small_opts(400);
        opts.schedule.initial_lr = 1e-2;
        opts.schedule.final_lr = 1e-3;
        opts.batch_size = 16;
        let (_, trace) = train::<f32>(cfg, &small_data(), &opts).unwrap();
        let first = trace.first().unwrap().total;
        let last = trace.last().unwrap().total;
        assert!(last < 0.7 * first, "{first} -> {last}");
    }

    #[test]
    fn configuration_errors() {
        let cfg = ModelConfig::new(6).with_lengths(8, 3).with_blocks(2);
        let empty = WindowSet::new(vec![], 8, 3, 1).unwrap();
        assert!(matches!(
            train::<f32>(cfg, &empty, &small_opts(5)),
            Err(Error::Config(_))
        ));
        let wrong = WindowSet::new(small_data().sequences().to_vec(), 8, 4, 1).unwrap();
        assert!(matches!(
            train::<f32>(cfg, &wrong, &small_opts(5)),
            Err(Error::Config(_))
        ));
        let mut opts = small_opts(5);
        opts.batch_size = 0;
        assert!(train::<f32>(cfg, &small_data(), &opts).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let trace = LossTrace {
            records: vec![LossRecord {
                step: 0,
                lr: 3e-4,
                total: 1.5,
                re: 1.0,
                v: 0.5,
            }],
        };
        assert_eq!(
            trace.to_csv(),
            "step,lr,loss_total,loss_re,loss_v\n0,0.0003,1.5,1,0.5\n"
        );
    }
}
