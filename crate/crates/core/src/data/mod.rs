//! Motion sequences, windowing, preprocessing and synthetic generation.
//!
//! Coordinates are millimeters throughout.

mod format;
mod synthetic;

pub use format::{
    decode_motion, encode_motion, import_csv, read_motion, write_motion, MOTION_MAGIC,
    MOTION_VERSION,
};
pub use synthetic::{derive_seed, generate_synthetic, generate_synthetic_set, SyntheticSpec};

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Scalar};

/// L frames of K joints, stored frame-major as (x, y, z) per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    frame_rate: f32,
    num_joints: usize,
    coords: Vec<f32>,
}

impl MotionSequence {
    pub const CANONICAL_FRAME_RATE: f32 = 25.0;

    pub fn new(frame_rate: f32, num_joints: usize, coords: Vec<f32>) -> Result<Self> {
        if !frame_rate.is_finite() || frame_rate <= 0.0 {
            return Err(Error::Config(format!(
                "frame rate must be positive, got {frame_rate}"
            )));
        }
        if num_joints == 0 {
            return Err(Error::InvalidSize(
                "a motion needs at least one joint".into(),
            ));
        }
        if coords.len() % (3 * num_joints) != 0 {
            return Err(Error::InvalidSize(format!(
                "{} coordinates do not split into frames of {} joints",
                coords.len(),
                num_joints
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("motion coordinates".into()));
        }
        Ok(Self {
            frame_rate,
            num_joints,
            coords,
        })
    }

    pub fn from_matrix<S: Scalar>(frame_rate: f32, m: &Matrix<S>) -> Result<Self> {
        if m.cols() % 3 != 0 {
            return Err(Error::InvalidSize(format!(
                "{} columns is not 3·K",
                m.cols()
            )));
        }
        Self::new(
            frame_rate,
            m.cols() / 3,
            m.data().iter().map(|v| v.f64() as f32).collect(),
        )
    }

    #[inline]
    pub fn frame_rate(&self) -> f32 {
        self.frame_rate
    }

    #[inline]
    pub fn num_joints(&self) -> usize {
        self.num_joints
    }

    #[inline]
    pub fn channels(&self) -> usize {
        3 * self.num_joints
    }

    #[inline]
    pub fn num_frames(&self) -> usize {
        self.coords.len() / self.channels()
    }

    pub fn coords(&self) -> &[f32] {
        &self.coords
    }

    pub fn frame(&self, i: usize) -> &[f32] {
        let c = self.channels();
        &self.coords[i * c..(i + 1) * c]
    }

    /// Frames `start..start + len` as a len×C matrix.
    pub fn window<S: Scalar>(&self, start: usize, len: usize) -> Result<Matrix<S>> {
        if start + len > self.num_frames() {
            return Err(Error::IndexOutOfRange {
                index: start + len,
                len: self.num_frames(),
            });
        }
        let c = self.channels();
        let data = self.coords[start * c..(start + len) * c]
            .iter()
            .map(|&v| S::of(v as f64))
            .collect();
        Matrix::new(len, c, data)
    }

    pub fn to_matrix<S: Scalar>(&self) -> Matrix<S> {
        self.window(0, self.num_frames()).expect("whole range")
    }

    /// Subtracts the root joint from every joint of every frame.
    pub fn center_on_root(&self, root: usize) -> Result<MotionSequence> {
        if root >= self.num_joints {
            return Err(Error::IndexOutOfRange {
                index: root,
                len: self.num_joints,
            });
        }
        let c = self.channels();
        let mut coords = self.coords.clone();
        for frame in coords.chunks_exact_mut(c) {
            let r = [frame[3 * root], frame[3 * root + 1], frame[3 * root + 2]];
            for joint in frame.chunks_exact_mut(3) {
                for a in 0..3 {
                    joint[a] -= r[a];
                }
            }
        }
        Ok(Self { coords, ..*self })
    }

    /// Keeps every `stride`-th frame, dividing the frame rate accordingly
    /// (e.g. 50 FPS with stride 2 gives 25 FPS).
    pub fn subsample(&self, stride: usize) -> Result<MotionSequence> {
        if stride == 0 {
            return Err(Error::Config(
                "subsampling stride must be at least 1".into(),
            ));
        }
        let coords = (0..self.num_frames())
            .step_by(stride)
            .flat_map(|i| self.frame(i).iter().copied())
            .collect();
        Ok(Self {
            frame_rate: self.frame_rate / stride as f32,
            num_joints: self.num_joints,
            coords,
        })
    }
}

/// An input window and the frames that immediately follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample<S = f32> {
    /// T×C observed frames.
    pub input: Matrix<S>,
    /// Following frames, N×C for training (longer for evaluation).
    pub target: Matrix<S>,
}

fn window_starts(
    num_frames: usize,
    span: usize,
    stride: usize,
) -> Result<std::iter::StepBy<std::ops::Range<usize>>> {
    if stride == 0 {
        return Err(Error::Config("window stride must be at least 1".into()));
    }
    let end = if num_frames >= span {
        num_frames - span + 1
    } else {
        0
    };
    Ok((0..end).step_by(stride))
}

/// Every window of `input_len + target_len` frames starting at 0, stride,
/// 2·stride, ...; sequences shorter than one window yield nothing.
pub fn make_windows<S: Scalar>(
    seq: &MotionSequence,
    input_len: usize,
    target_len: usize,
    stride: usize,
) -> Result<Vec<TrainSample<S>>> {
    window_starts(seq.num_frames(), input_len + target_len, stride)?
        .map(|o| {
            Ok(TrainSample {
                input: seq.window(o, input_len)?,
                target: seq.window(o + input_len, target_len)?,
            })
        })
        .collect()
}

/// Lazily materialized windows over a set of sequences.
#[derive(Debug, Clone)]
pub struct WindowSet {
    sequences: Vec<MotionSequence>,
    index: Vec<(usize, usize)>,
    input_len: usize,
    target_len: usize,
}

impl WindowSet {
    pub fn new(
        sequences: Vec<MotionSequence>,
        input_len: usize,
        target_len: usize,
        stride: usize,
    ) -> Result<Self> {
        if let Some(first) = sequences.first() {
            if let Some(odd) = sequences
                .iter()
                .find(|s| s.num_joints() != first.num_joints())
            {
                return Err(Error::Config(format!(
                    "sequences mix {} and {} joints",
                    first.num_joints(),
                    odd.num_joints()
                )));
            }
        }
        let mut index = Vec::new();
        for (s, seq) in sequences.iter().enumerate() {
            for o in window_starts(seq.num_frames(), input_len + target_len, stride)? {
                index.push((s, o));
            }
        }
        Ok(Self {
            sequences,
            index,
            input_len,
            target_len,
        })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn channels(&self) -> Option<usize> {
        self.sequences.first().map(MotionSequence::channels)
    }

    pub fn frame_rate(&self) -> Option<f32> {
        self.sequences.first().map(MotionSequence::frame_rate)
    }

    pub fn sequences(&self) -> &[MotionSequence] {
        &self.sequences
    }

    /// `(sequence index, start frame)` of window `i`.
    pub fn position(&self, i: usize) -> (usize, usize) {
        self.index[i]
    }

    pub fn sample<S: Scalar>(&self, i: usize) -> Result<TrainSample<S>> {
        let &(s, o) = self.index.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.index.len(),
        })?;
        let seq = &self.sequences[s];
        Ok(TrainSample {
            input: seq.window(o, self.input_len)?,
            target: seq.window(o + self.input_len, self.target_len)?,
        })
    }
}
