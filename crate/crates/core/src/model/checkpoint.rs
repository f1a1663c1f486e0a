//! Binary checkpoint format.
//!
//! ```text
//! "SMLP" | version u16 | arch, T, N, C, n, transpose, layernorm, dct (u32 each)
//!        | parameters as f32 in declaration order | CRC-64/XZ of all preceding bytes (u64)
//! ```
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use super::{Architecture, Model, ModelConfig, SiMlpeParams};
use crate::codec::{self, Reader};
use crate::error::{Error, Result};
use crate::tensor::Scalar;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"SMLP";
pub const CHECKPOINT_VERSION: u16 = 1;
const CONFIG_FIELDS: usize = 8;

pub fn encode_checkpoint<S: Scalar>(model: &Model<S>) -> Vec<u8> {
    let cfg = model.config();
    let mut buf = Vec::with_capacity(6 + 4 * CONFIG_FIELDS + 4 * model.param_count() + 8);
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let fields = [
        cfg.arch.code(),
        cfg.input_len as u32,
        cfg.output_len as u32,
        cfg.channels as u32,
        cfg.num_blocks as u32,
        cfg.use_transpose as u32,
        cfg.use_layernorm as u32,
        cfg.use_dct as u32,
    ];
    for f in fields {
        buf.extend_from_slice(&f.to_le_bytes());
    }
    for tensor in model.params().tensors() {
        for &v in tensor {
            buf.extend_from_slice(&(v.f64() as f32).to_le_bytes());
        }
    }
    codec::seal(buf)
}

fn decode_config(body: &[u8]) -> Result<ModelConfig> {
    let field = |i| codec::le_u32_at(body, i);
    let flag = |i: usize| -> Result<bool> {
        match field(i)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::Header(format!("flag field {i} has value {v}"))),
        }
    };
    let arch_code = field(0)?;
    let arch = Architecture::from_code(arch_code)
        .ok_or_else(|| Error::Header(format!("unknown architecture code {arch_code}")))?;
    let cfg = ModelConfig {
        arch,
        input_len: field(1)? as usize,
        output_len: field(2)? as usize,
        channels: field(3)? as usize,
        num_blocks: field(4)? as usize,
        use_transpose: flag(5)?,
        use_layernorm: flag(6)?,
        use_dct: flag(7)?,
    };
    cfg.validate()
        .map_err(|e| Error::Header(format!("stored configuration is invalid: {e}")))?;
    Ok(cfg)
}

pub fn decode_checkpoint<S: Scalar>(bytes: &[u8]) -> Result<Model<S>> {
    let body = codec::open(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, |body| {
        let cfg = decode_config(body)?;
        Ok(4 * CONFIG_FIELDS + 4 * cfg.param_count())
    })?;
    let cfg = decode_config(body)?;
    let mut reader = Reader::new(&body[4 * CONFIG_FIELDS..]);
    let mut params = SiMlpeParams::<S>::zeros(&cfg);
    for tensor in params.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = S::of(reader.f32()? as f64);
        }
    }
    Model::new(cfg, params)
}

pub fn save_checkpoint<S: Scalar>(model: &Model<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<S: Scalar>(path: impl AsRef<Path>) -> Result<Model<S>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
