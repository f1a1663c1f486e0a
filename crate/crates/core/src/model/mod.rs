//! The all-MLP motion predictor, its reference baselines and checkpoint I/O.

mod baseline;
mod checkpoint;
mod config;
mod network;
mod params;

pub use baseline::last_frame_baseline;
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use config::{Architecture, ModelConfig};
pub use network::{ForwardCache, Gradients, Model, Prediction};
pub use params::{MlpBlock, SiMlpeParams};
