//! Run configuration: `key = value` files with `#` comments.

use std::fs;
use std::path::{Path, PathBuf};

use simlpe::model::Architecture;
use simlpe::{
    Error, LossWeights, LrSchedule, ModelConfig, Result, SyntheticSpec, DEFAULT_HORIZONS_MS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

/// Every recognized key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("arch", "simlpe | one_fc"),
    ("input_len", "observed frames T (50)"),
    ("output_len", "supervised frames N (10)"),
    ("num_blocks", "MLP blocks (48)"),
    ("use_transpose", "block FCs act along time (true)"),
    ("use_layernorm", "normalize inside blocks (true)"),
    ("use_dct", "encode time with the DCT (true)"),
    ("w_re", "reconstruction loss weight (1)"),
    ("w_v", "velocity loss weight (1)"),
    ("initial_lr", "learning rate before the drop (3e-4)"),
    ("final_lr", "learning rate after the drop (1e-5)"),
    ("drop_step", "step at which the rate drops (30000)"),
    ("total_steps", "optimizer steps (35000)"),
    ("batch_size", "windows per step (256)"),
    ("log_every", "loss trace interval (100)"),
    ("synthetic", "use generated motion instead of files (false)"),
    (
        "num_joints",
        "joints K for synthetic data and CSV import (22)",
    ),
    ("num_frames", "frames per synthetic sequence (500)"),
    ("frame_rate", "synthetic and CSV frame rate (25)"),
    ("harmonics", "sinusoids per synthetic coordinate (3)"),
    ("freq_min", "Hz (0.2)"),
    ("freq_max", "Hz (1.0)"),
    ("amp_min", "mm (20)"),
    ("amp_max", "mm (100)"),
    ("drift_min", "mm per frame (-0.5)"),
    ("drift_max", "mm per frame (0.5)"),
    ("train_sequences", "synthetic training sequences (20)"),
    ("test_sequences", "synthetic test sequences (20)"),
    ("train_data", "comma-separated .motn or .csv files"),
    ("test_data", "comma-separated .motn or .csv files"),
    (
        "subsample",
        "keep every k-th frame, e.g. 2 for 50 -> 25 fps (1)",
    ),
    ("root_joint", "joint index to center on, or none (none)"),
    ("train_stride", "frames between training windows (1)"),
    ("eval_stride", "frames between evaluation windows (10)"),
    (
        "horizons",
        "comma-separated ms (80,160,320,400,560,720,880,1000)",
    ),
    ("seed", "seed for init, sampling and synthetic data (0)"),
    ("precision", "f32 | f64 (f32)"),
    ("out", "output directory (out)"),
    ("checkpoint", "checkpoint path (<out>/model.smlp)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub arch: Architecture,
    pub input_len: usize,
    pub output_len: usize,
    pub num_blocks: usize,
    pub use_transpose: bool,
    pub use_layernorm: bool,
    pub use_dct: bool,
    pub weights: LossWeights,
    pub schedule: LrSchedule,
    pub batch_size: usize,
    pub log_every: usize,
    pub synthetic: bool,
    pub synth: SyntheticSpec,
    pub train_sequences: usize,
    pub test_sequences: usize,
    pub train_data: Vec<PathBuf>,
    pub test_data: Vec<PathBuf>,
    pub subsample: usize,
    pub root_joint: Option<usize>,
    pub train_stride: usize,
    pub eval_stride: usize,
    pub horizons: Vec<u32>,
    pub seed: u64,
    pub precision: Precision,
    pub out: PathBuf,
    pub checkpoint: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = ModelConfig::new(66);
        Self {
            arch: m.arch,
            input_len: m.input_len,
            output_len: m.output_len,
            num_blocks: m.num_blocks,
            use_transpose: m.use_transpose,
            use_layernorm: m.use_layernorm,
            use_dct: m.use_dct,
            weights: LossWeights::default(),
            schedule: LrSchedule::default(),
            batch_size: 256,
            log_every: 100,
            synthetic: false,
            synth: SyntheticSpec::default(),
            train_sequences: 20,
            test_sequences: 20,
            train_data: Vec::new(),
            test_data: Vec::new(),
            subsample: 1,
            root_joint: None,
            train_stride: 1,
            eval_stride: 10,
            horizons: DEFAULT_HORIZONS_MS.to_vec(),
            seed: 0,
            precision: Precision::F32,
            out: PathBuf::from("out"),
            checkpoint: None,
        }
    }
}

fn bad(key: &str, value: &str, want: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: expected {want}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str, want: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, want))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn paths(value: &str) -> Vec<PathBuf> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect()
}

pub fn parse_horizons(value: &str) -> Result<Vec<u32>> {
    let hs = value
        .split(',')
        .map(|s| num::<u32>("horizons", s.trim(), "comma-separated milliseconds"))
        .collect::<Result<Vec<_>>>()?;
    if hs.is_empty() {
        return Err(Error::Config("horizons list is empty".into()));
    }
    Ok(hs)
}

impl RunConfig {
    /// Applies a single key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "arch" => {
                self.arch = match v {
                    "simlpe" => Architecture::SiMlpe,
                    "one_fc" => Architecture::OneFc,
                    _ => return Err(bad(key, v, "simlpe or one_fc")),
                }
            }
            "input_len" => self.input_len = num(key, v, "a frame count")?,
            "output_len" => self.output_len = num(key, v, "a frame count")?,
            "num_blocks" => self.num_blocks = num(key, v, "a block count")?,
            "use_transpose" => self.use_transpose = flag(key, v)?,
            "use_layernorm" => self.use_layernorm = flag(key, v)?,
            "use_dct" => self.use_dct = flag(key, v)?,
            "w_re" => self.weights.w_re = num(key, v, "a real")?,
            "w_v" => self.weights.w_v = num(key, v, "a real")?,
            "initial_lr" => self.schedule.initial_lr = num(key, v, "a real")?,
            "final_lr" => self.schedule.final_lr = num(key, v, "a real")?,
            "drop_step" => self.schedule.drop_step = num(key, v, "a step")?,
            "total_steps" => self.schedule.total_steps = num(key, v, "a step count")?,
            "batch_size" => self.batch_size = num(key, v, "a count")?,
            "log_every" => self.log_every = num(key, v, "a step count")?,
            "synthetic" => self.synthetic = flag(key, v)?,
            "num_joints" => self.synth.num_joints = num(key, v, "a joint count")?,
            "num_frames" => self.synth.num_frames = num(key, v, "a frame count")?,
            "frame_rate" => self.synth.frame_rate = num(key, v, "frames per second")?,
            "harmonics" => self.synth.harmonics = num(key, v, "a count")?,
            "freq_min" => self.synth.freq_range.0 = num(key, v, "Hz")?,
            "freq_max" => self.synth.freq_range.1 = num(key, v, "Hz")?,
            "amp_min" => self.synth.amp_range.0 = num(key, v, "mm")?,
            "amp_max" => self.synth.amp_range.1 = num(key, v, "mm")?,
            "drift_min" => self.synth.drift_range.0 = num(key, v, "mm per frame")?,
            "drift_max" => self.synth.drift_range.1 = num(key, v, "mm per frame")?,
            "train_sequences" => self.train_sequences = num(key, v, "a count")?,
            "test_sequences" => self.test_sequences = num(key, v, "a count")?,
            "train_data" => self.train_data = paths(v),
            "test_data" => self.test_data = paths(v),
            "subsample" => self.subsample = num(key, v, "a stride")?,
            "root_joint" => {
                self.root_joint = match v {
                    "none" | "" => None,
                    _ => Some(num(key, v, "a joint index or none")?),
                }
            }
            "train_stride" => self.train_stride = num(key, v, "a stride")?,
            "eval_stride" => self.eval_stride = num(key, v, "a stride")?,
            "horizons" => self.horizons = parse_horizons(v)?,
            "seed" => self.seed = num(key, v, "an unsigned integer")?,
            "precision" => {
                self.precision = match v {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(bad(key, v, "f32 or f64")),
                }
            }
            "out" => self.out = PathBuf::from(v),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(v)),
            _ => {
                let known: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
                return Err(Error::Config(format!(
                    "unknown key {key:?}; known keys: {}",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`; `origin` labels errors.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{origin}:{}: expected key = value, got {line:?}",
                    i + 1
                )));
            };
            self.set(key.trim(), value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{origin}:{}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {kv:?}")))?;
        self.set(k.trim(), v)
    }

    pub fn model_config(&self, channels: usize) -> ModelConfig {
        let base = match self.arch {
            Architecture::SiMlpe => ModelConfig::new(channels)
                .with_lengths(self.input_len, self.output_len)
                .with_blocks(self.num_blocks),
            Architecture::OneFc => ModelConfig::one_fc(self.input_len, self.output_len, channels),
        };
        ModelConfig {
            use_transpose: self.use_transpose && base.use_transpose,
            use_layernorm: self.use_layernorm && base.use_layernorm,
            use_dct: self.use_dct,
            ..base
        }
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| self.out.join("model.smlp"))
    }

    /// Checks cross-field constraints that single keys cannot.
    pub fn validate(&self) -> Result<()> {
        LossWeights::new(self.weights.w_re, self.weights.w_v)?;
        self.schedule.validate()?;
        self.synth.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.subsample == 0 || self.train_stride == 0 || self.eval_stride == 0 {
            return Err(Error::Config(
                "subsample and window strides must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# header\nnum_blocks = 12  # trailing\n\nw_v=0\nhorizons = 80, 1000\n",
            "t",
        )
        .unwrap();
        assert_eq!(c.num_blocks, 12);
        assert_eq!(c.weights.w_v, 0.0);
        assert_eq!(c.horizons, vec![80, 1000]);
        c.apply_override("num_blocks=3").unwrap();
        assert_eq!(c.num_blocks, 3);
    }

    #[test]
    fn unknown_key_names_the_line() {
        let mut c = RunConfig::default();
        let err = c
            .apply_text("seed = 1\nbogus = 2\n", "run.cfg")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("run.cfg:2") && msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn rejects_malformed_values() {
        let mut c = RunConfig::default();
        assert!(c.set("precision", "f16").is_err());
        assert!(c.set("use_dct", "maybe").is_err());
        assert!(c.set("seed", "-1").is_err());
        assert!(c.apply_text("no equals sign\n", "t").is_err());
    }

    #[test]
    fn every_listed_key_is_accepted() {
        let samples = [
            ("arch", "one_fc"),
            ("root_joint", "0"),
            ("precision", "f64"),
            ("horizons", "80"),
            ("train_data", "a.motn,b.csv"),
        ];
        for (k, _) in KEYS {
            let v = samples
                .iter()
                .find(|(s, _)| s == k)
                .map(|(_, v)| *v)
                .unwrap_or(match *k {
                    "use_transpose" | "use_layernorm" | "use_dct" | "synthetic" => "true",
                    "out" | "checkpoint" | "test_data" => "x",
                    _ => "1",
                });
            let mut c = RunConfig::default();
            c.set(k, v).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }

    #[test]
    fn model_config_follows_keys() {
        let mut c = RunConfig::default();
        c.set("num_blocks", "48").unwrap();
        assert_eq!(c.model_config(66).param_count(), 136_044);
        c.set("arch", "one_fc").unwrap();
        assert_eq!(c.model_config(66).param_count(), 2550);
    }
}
