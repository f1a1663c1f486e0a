//! All-MLP human motion prediction.
//!
//! A motion window of T frames and K joints (C = 3K coordinates per frame)
//! is encoded with an orthonormal DCT along time, mixed by square fully
//! connected layers alternating between the spatial and temporal axes, and
//! decoded back into a residual displacement from the last observed pose.
//! Gradients are hand-written and checked against finite differences.
//!
//! Modules map onto the pipeline:
//!
//! - [`tensor`]: dense matrices, affine and layer-norm layers, `fd_check`
//! - [`dct`]: the temporal DCT basis
//! - [`model`]: configuration, parameters, forward/backward, checkpoints
//! - [`loss`], [`optim`], [`train`]: objective, Adam, training loop
//! - [`data`]: motion files, CSV import, windows, synthetic motion
//! - [`eval`]: auto-regressive rollout and MPJPE reports
//! - [`gradcheck`]: finite-difference verification of every backward pass

mod codec;
pub mod data;
pub mod dct;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod optim;
pub mod tensor;
pub mod train;

pub use data::{MotionSequence, SyntheticSpec, TrainSample, WindowSet};
pub use dct::DctBasis;
pub use error::{Error, Result};
pub use eval::{evaluate, rollout, EvalReport, LastFrame, Predictor, DEFAULT_HORIZONS_MS};
pub use loss::LossWeights;
pub use model::{Architecture, Model, ModelConfig, Prediction, SiMlpeParams};
pub use optim::LrSchedule;
pub use tensor::{Matrix, Scalar};
pub use train::{train, train_model, LossTrace, TrainOptions};
