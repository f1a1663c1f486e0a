//! Shared fixtures for the benchmarks.

use simlpe::data::generate_synthetic_set;
use simlpe::{Matrix, Model, ModelConfig, Result, SyntheticSpec, WindowSet};

/// 22 joints at T=50, N=10, the standard skeleton size.
pub const CHANNELS: usize = 66;

/// A freshly initialized model with `blocks` MLP blocks.
pub fn model(blocks: usize) -> Result<Model<f32>> {
    Model::init(ModelConfig::new(CHANNELS).with_blocks(blocks), 7)
}

/// Windows over a few synthetic sequences.
pub fn windows() -> Result<WindowSet> {
    let spec = SyntheticSpec {
        num_frames: 200,
        seed: 3,
        ..Default::default()
    };
    WindowSet::new(generate_synthetic_set(&spec, 4)?, 50, 10, 1)
}

/// Input windows and their targets.
pub type Batch = (Vec<Matrix<f32>>, Vec<Matrix<f32>>);

/// The first `n` windows (wrapping around).
pub fn batch(data: &WindowSet, n: usize) -> Result<Batch> {
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let s = data.sample::<f32>(i % data.len())?;
        inputs.push(s.input);
        targets.push(s.target);
    }
    Ok((inputs, targets))
}
