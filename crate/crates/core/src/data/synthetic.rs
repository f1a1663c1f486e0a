use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MotionSequence;
use crate::error::{Error, Result};

/// Parameters of the sinusoid-plus-drift motion generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_joints: usize,
    pub num_frames: usize,
    pub frame_rate: f32,
    /// Sinusoids summed per coordinate.
    pub harmonics: usize,
    /// Hz.
    pub freq_range: (f64, f64),
    /// mm.
    pub amp_range: (f64, f64),
    /// mm per frame.
    pub drift_range: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_joints: 22,
            num_frames: 500,
            frame_rate: MotionSequence::CANONICAL_FRAME_RATE,
            harmonics: 3,
            freq_range: (0.2, 1.0),
            amp_range: (20.0, 100.0),
            drift_range: (-0.5, 0.5),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, (lo, hi): (f64, f64)| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} range [{lo}, {hi}] is empty")))
            }
        };
        range("frequency", self.freq_range)?;
        range("amplitude", self.amp_range)?;
        range("drift", self.drift_range)?;
        if self.num_joints == 0 {
            return Err(Error::Config(
                "synthetic motion needs at least one joint".into(),
            ));
        }
        if self.frame_rate.is_nan() || self.frame_rate <= 0.0 {
            return Err(Error::Config("frame rate must be positive".into()));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(RangeInclusive::new(lo, hi))
    }
}

/// Each coordinate is `Σ_h a_h sin(2π f_h t / fps + φ_h) + drift · t` with
/// frequencies, phases, amplitudes and drift drawn per coordinate from a
/// ChaCha8 stream seeded by `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MotionSequence> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let channels = 3 * spec.num_joints;
    let fps = spec.frame_rate as f64;

    struct Coord {
        waves: Vec<(f64, f64, f64)>,
        drift: f64,
    }
    let coords: Vec<Coord> = (0..channels)
        .map(|_| {
            let waves = (0..spec.harmonics)
                .map(|_| {
                    let f = draw(&mut rng, spec.freq_range);
                    let phase = rng.gen_range(0.0..TAU);
                    let a = draw(&mut rng, spec.amp_range);
                    (f, phase, a)
                })
                .collect();
            Coord {
                waves,
                drift: draw(&mut rng, spec.drift_range),
            }
        })
        .collect();

    let mut data = Vec::with_capacity(spec.num_frames * channels);
    for t in 0..spec.num_frames {
        let tf = t as f64;
        for c in &coords {
            let v: f64 = c
                .waves
                .iter()
                .map(|&(f, phase, a)| a * (TAU * f * tf / fps + phase).sin())
                .sum::<f64>()
                + c.drift * tf;
            data.push(v as f32);
        }
    }
    MotionSequence::new(spec.frame_rate, spec.num_joints, data)
}

/// SplitMix64 finalizer over `base` and `index`; gives well-separated seeds
/// for the members of a generated set.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `count` sequences, sequence `i` generated with `derive_seed(spec.seed, i)`.
pub fn generate_synthetic_set(spec: &SyntheticSpec, count: usize) -> Result<Vec<MotionSequence>> {
    (0..count)
        .map(|i| {
            generate_synthetic(&SyntheticSpec {
                seed: derive_seed(spec.seed, i as u64),
                ..spec.clone()
            })
        })
        .collect()
}
