//! Auto-regressive rollout and MPJPE reporting.

use std::fmt::Write as _;

use crate::data::WindowSet;
use crate::error::{Error, Result};
use crate::loss::mean_joint_distance;
use crate::model::{last_frame_baseline, Model};
use crate::tensor::{Matrix, Scalar};

/// Horizons reported by default, in milliseconds.
pub const DEFAULT_HORIZONS_MS: [u32; 8] = [80, 160, 320, 400, 560, 720, 880, 1000];

/// Anything that maps T observed frames to the next N.
pub trait Predictor<S: Scalar> {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn param_count(&self) -> usize;

    /// N×C absolute poses for each T×C window.
    fn predict_batch(&self, windows: &[Matrix<S>]) -> Result<Vec<Matrix<S>>>;
}

impl<S: Scalar> Predictor<S> for Model<S> {
    fn input_len(&self) -> usize {
        self.config().input_len
    }

    fn output_len(&self) -> usize {
        self.config().output_len
    }

    fn param_count(&self) -> usize {
        Model::param_count(self)
    }

    fn predict_batch(&self, windows: &[Matrix<S>]) -> Result<Vec<Matrix<S>>> {
        let (preds, _) = self.forward_batch(windows)?;
        Ok(preds.into_iter().map(|p| p.absolute).collect())
    }
}

/// Repeats the last observed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LastFrame {
    pub input_len: usize,
    pub output_len: usize,
}

impl<S: Scalar> Predictor<S> for LastFrame {
    fn input_len(&self) -> usize {
        self.input_len
    }

    fn output_len(&self) -> usize {
        self.output_len
    }

    fn param_count(&self) -> usize {
        0
    }

    fn predict_batch(&self, windows: &[Matrix<S>]) -> Result<Vec<Matrix<S>>> {
        windows
            .iter()
            .map(|w| last_frame_baseline(w, self.output_len))
            .collect()
    }
}

/// Feeds predictions back as input until `horizon` frames exist, sliding the
/// T-frame window by N each step. Returns H×C per window.
pub fn rollout_batch<S: Scalar, P: Predictor<S> + ?Sized>(
    predictor: &P,
    windows: &[Matrix<S>],
    horizon: usize,
) -> Result<Vec<Matrix<S>>> {
    if horizon == 0 {
        return Err(Error::Config(
            "rollout horizon must be at least 1 frame".into(),
        ));
    }
    let (t, n) = (predictor.input_len(), predictor.output_len());
    if n == 0 {
        return Err(Error::Config("predictor emits no frames".into()));
    }
    for w in windows {
        if w.rows() != t {
            return Err(Error::shape("rollout", (t, w.cols()), w.shape()));
        }
    }
    let steps = horizon.div_ceil(n);
    let mut current: Vec<Matrix<S>> = windows.to_vec();
    let mut produced: Vec<Vec<Matrix<S>>> = vec![Vec::with_capacity(steps); windows.len()];
    for step in 0..steps {
        let preds = predictor.predict_batch(&current)?;
        if step + 1 < steps {
            for (w, p) in current.iter_mut().zip(&preds) {
                let joined = Matrix::vstack(&[w.clone(), p.clone()])?;
                *w = joined.slice_rows(joined.rows() - t, t)?;
            }
        }
        for (acc, p) in produced.iter_mut().zip(preds) {
            acc.push(p);
        }
    }
    produced
        .into_iter()
        .map(|parts| Matrix::vstack(&parts)?.slice_rows(0, horizon))
        .collect()
}

pub fn rollout<S: Scalar, P: Predictor<S> + ?Sized>(
    predictor: &P,
    x: &Matrix<S>,
    horizon: usize,
) -> Result<Matrix<S>> {
    let mut out = rollout_batch(predictor, std::slice::from_ref(x), horizon)?;
    Ok(out.pop().expect("one window"))
}

/// Mean over joints of the 3-D distance at a single frame.
pub fn mpjpe<S: Scalar>(pred: &Matrix<S>, gt: &Matrix<S>, frame_index: usize) -> Result<S> {
    if pred.shape() != gt.shape() {
        return Err(Error::shape("mpjpe", pred.shape(), gt.shape()));
    }
    if pred.cols() == 0 || pred.cols() % 3 != 0 {
        return Err(Error::shape("mpjpe", pred.shape(), (pred.rows(), 3)));
    }
    if frame_index >= pred.rows() {
        return Err(Error::IndexOutOfRange {
            index: frame_index,
            len: pred.rows(),
        });
    }
    Ok(mean_joint_distance(
        pred.row(frame_index),
        gt.row(frame_index),
    ))
}

/// Zero-based rollout frame for a horizon: `h · fps / 1000 − 1`.
pub fn horizon_frame_index(horizon_ms: u32, frame_rate: f32) -> Result<usize> {
    let frames = horizon_ms as f64 * frame_rate as f64 / 1000.0;
    let rounded = frames.round();
    if horizon_ms == 0 || rounded < 1.0 || (frames - rounded).abs() > 1e-6 {
        let step = 1000.0 / frame_rate as f64;
        let valid: Vec<String> = (1..=4).map(|k| format!("{}", k as f64 * step)).collect();
        return Err(Error::Config(format!(
            "horizon {horizon_ms} ms is not a multiple of the {step} ms frame interval \
             (valid: {}, ...)",
            valid.join(", ")
        )));
    }
    Ok(rounded as usize - 1)
}

/// Frames a rollout must produce to cover every horizon.
pub fn rollout_frames(horizons_ms: &[u32], frame_rate: f32) -> Result<usize> {
    horizons_ms
        .iter()
        .map(|&h| horizon_frame_index(h, frame_rate).map(|i| i + 1))
        .try_fold(0, |m, r| r.map(|v| m.max(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_tag: String,
    pub horizons_ms: Vec<u32>,
    pub mpjpe_mm: Vec<f64>,
    pub num_samples: usize,
    pub param_count: usize,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("horizon_ms,mpjpe_mm\n");
        for (h, e) in self.horizons_ms.iter().zip(&self.mpjpe_mm) {
            let _ = writeln!(s, "{h},{e}");
        }
        s
    }

    pub fn at(&self, horizon_ms: u32) -> Option<f64> {
        self.horizons_ms
            .iter()
            .position(|&h| h == horizon_ms)
            .map(|i| self.mpjpe_mm[i])
    }
}

/// Table with one row per report and one column per horizon, followed by
/// the parameter count in millions.
pub fn format_table(reports: &[EvalReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let name_w = reports
        .iter()
        .map(|r| r.model_tag.len())
        .max()
        .unwrap_or(0)
        .max(5);
    let mut s = format!("{:<name_w$} |", "model");
    for h in &first.horizons_ms {
        let _ = write!(s, " {h:>7}");
    }
    s.push_str(" | params(M)\n");
    s.push_str(&"-".repeat(s.len() - 1));
    s.push('\n');
    for r in reports {
        let _ = write!(s, "{:<name_w$} |", r.model_tag);
        for e in &r.mpjpe_mm {
            let _ = write!(s, " {e:>7.1}");
        }
        let _ = writeln!(s, " | {:.3}", r.param_count as f64 / 1e6);
    }
    s
}

/// Rolls every window of `samples` out to the furthest horizon and averages
/// MPJPE per horizon. `samples` must carry at least that many target frames.
pub fn evaluate<S: Scalar, P: Predictor<S> + ?Sized>(
    predictor: &P,
    samples: &WindowSet,
    horizons_ms: &[u32],
    model_tag: &str,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no evaluation windows".into()));
    }
    let fps = samples.frame_rate().expect("non-empty set");
    let indices = horizons_ms
        .iter()
        .map(|&h| horizon_frame_index(h, fps))
        .collect::<Result<Vec<_>>>()?;
    let horizon = rollout_frames(horizons_ms, fps)?;
    if samples.target_len() < horizon {
        return Err(Error::Config(format!(
            "evaluation windows carry {} future frames, horizons need {horizon}",
            samples.target_len()
        )));
    }
    if samples.input_len() != predictor.input_len() {
        return Err(Error::Config(format!(
            "evaluation windows observe {} frames, model expects {}",
            samples.input_len(),
            predictor.input_len()
        )));
    }

    const CHUNK: usize = 64;
    let mut sums = vec![0.0f64; horizons_ms.len()];
    let mut start = 0;
    while start < samples.len() {
        let end = (start + CHUNK).min(samples.len());
        let batch = (start..end)
            .map(|i| samples.sample::<S>(i))
            .collect::<Result<Vec<_>>>()?;
        let inputs: Vec<Matrix<S>> = batch.iter().map(|s| s.input.clone()).collect();
        let outputs = rollout_batch(predictor, &inputs, horizon)?;
        for (out, sample) in outputs.iter().zip(&batch) {
            let gt = sample.target.slice_rows(0, horizon)?;
            for (acc, &idx) in sums.iter_mut().zip(&indices) {
                *acc += mpjpe(out, &gt, idx)?.f64();
            }
        }
        start = end;
    }
    let count = samples.len() as f64;
    Ok(EvalReport {
        model_tag: model_tag.to_string(),
        horizons_ms: horizons_ms.to_vec(),
        mpjpe_mm: sums.into_iter().map(|s| s / count).collect(),
        num_samples: samples.len(),
        param_count: predictor.param_count(),
    })
}
