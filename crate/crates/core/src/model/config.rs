use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Spatial FC, n temporal MLP blocks, spatial FC.
    SiMlpe,
    /// A single trainable temporal FC with no spatial heads, blocks or skip.
    OneFc,
}

impl Architecture {
    pub(crate) fn code(self) -> u32 {
        match self {
            Architecture::SiMlpe => 0,
            Architecture::OneFc => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Architecture::SiMlpe),
            1 => Some(Architecture::OneFc),
            _ => None,
        }
    }
}

/// Network shape and ablation switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelConfig {
    pub arch: Architecture,
    /// Observed frames T.
    pub input_len: usize,
    /// Supervised future frames N.
    pub output_len: usize,
    /// Feature width C = 3·K.
    pub channels: usize,
    pub num_blocks: usize,
    pub use_transpose: bool,
    pub use_layernorm: bool,
    pub use_dct: bool,
}

impl ModelConfig {
    pub const DEFAULT_INPUT_LEN: usize = 50;
    pub const DEFAULT_OUTPUT_LEN: usize = 10;
    pub const DEFAULT_NUM_BLOCKS: usize = 48;

    /// Full model with T=50, N=10, 48 blocks and every component enabled.
    pub fn new(channels: usize) -> Self {
        Self {
            arch: Architecture::SiMlpe,
            input_len: Self::DEFAULT_INPUT_LEN,
            output_len: Self::DEFAULT_OUTPUT_LEN,
            channels,
            num_blocks: Self::DEFAULT_NUM_BLOCKS,
            use_transpose: true,
            use_layernorm: true,
            use_dct: true,
        }
    }

    pub fn one_fc(input_len: usize, output_len: usize, channels: usize) -> Self {
        Self {
            arch: Architecture::OneFc,
            input_len,
            output_len,
            channels,
            num_blocks: 0,
            use_transpose: true,
            use_layernorm: false,
            use_dct: true,
        }
    }

    pub fn with_blocks(mut self, num_blocks: usize) -> Self {
        self.num_blocks = num_blocks;
        self
    }

    pub fn with_lengths(mut self, input_len: usize, output_len: usize) -> Self {
        self.input_len = input_len;
        self.output_len = output_len;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.input_len == 0 {
            return bad("input length must be at least 1".into());
        }
        if self.output_len == 0 || self.output_len > self.input_len {
            return bad(format!(
                "output length {} must satisfy 1 <= N <= T = {}",
                self.output_len, self.input_len
            ));
        }
        if self.channels == 0 || self.channels % 3 != 0 {
            return bad(format!(
                "channel count {} must be a positive multiple of 3",
                self.channels
            ));
        }
        match self.arch {
            Architecture::SiMlpe if self.num_blocks == 0 => {
                bad("the MLP model needs at least one block".into())
            }
            Architecture::OneFc if self.num_blocks != 0 => {
                bad("the one-FC baseline has no MLP blocks".into())
            }
            Architecture::OneFc if !self.use_transpose => {
                bad("the one-FC baseline always acts along time".into())
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn num_joints(&self) -> usize {
        self.channels / 3
    }

    /// Width of the temporal-mixing layers: T with the transpose, C without.
    pub fn block_dim(&self) -> usize {
        if self.use_transpose {
            self.input_len
        } else {
            self.channels
        }
    }

    pub(crate) fn has_heads(&self) -> bool {
        self.arch == Architecture::SiMlpe
    }

    /// Closed-form count of learnable scalars:
    /// `2(C² + C) + n(d² + d + 2d)` with d the block width (the `2d` only
    /// with layer norm on), or `T² + T` for the one-FC baseline.
    pub fn param_count(&self) -> usize {
        match self.arch {
            Architecture::OneFc => self.input_len * self.input_len + self.input_len,
            Architecture::SiMlpe => {
                let c = self.channels;
                let d = self.block_dim();
                let ln = if self.use_layernorm { 2 * d } else { 0 };
                2 * (c * c + c) + self.num_blocks * (d * d + d + ln)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_counts() {
        let base = ModelConfig::new(66);
        assert_eq!(base.param_count(), 136_044);
        assert_eq!(base.with_blocks(1).param_count(), 11_494);
        assert_eq!(base.with_blocks(2).param_count(), 14_144);
        assert_eq!(ModelConfig::one_fc(50, 10, 66).param_count(), 2_550);
    }

    #[test]
    fn validation() {
        assert!(ModelConfig::new(66).validate().is_ok());
        assert!(ModelConfig::new(65).validate().is_err());
        assert!(ModelConfig::new(66).with_blocks(0).validate().is_err());
        assert!(ModelConfig::new(66)
            .with_lengths(10, 11)
            .validate()
            .is_err());
        assert!(ModelConfig::new(66).with_lengths(10, 0).validate().is_err());
        assert!(ModelConfig::one_fc(50, 10, 66).validate().is_ok());
        assert!(ModelConfig::one_fc(50, 10, 66)
            .with_blocks(1)
            .validate()
            .is_err());
    }
}
