//! Position and velocity objectives.
//!
//! Both terms reduce to the mean Euclidean distance per (frame, joint) pair,
//! the same reduction MPJPE uses.

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub w_re: f64,
    pub w_v: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            w_re: 1.0,
            w_v: 1.0,
        }
    }
}

impl LossWeights {
    pub fn new(w_re: f64, w_v: f64) -> Result<Self> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(w_re) || !ok(w_v) {
            return Err(Error::Config(format!(
                "loss weights must be finite and non-negative, got ({w_re}, {w_v})"
            )));
        }
        Ok(Self { w_re, w_v })
    }
}

/// Weighted total with its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue<S> {
    pub total: S,
    pub re: S,
    pub v: S,
    /// False when the window has fewer than two frames and the velocity
    /// term was forced to zero.
    pub velocity_defined: bool,
}

fn check_pair<S: Scalar>(op: &'static str, pred: &Matrix<S>, gt: &Matrix<S>) -> Result<()> {
    if pred.shape() != gt.shape() {
        return Err(Error::shape(op, pred.shape(), gt.shape()));
    }
    if pred.cols() % 3 != 0 {
        return Err(Error::shape(
            op,
            pred.shape(),
            (pred.rows(), pred.cols() / 3 * 3),
        ));
    }
    Ok(())
}

/// Mean over joints of the 3-D distance between two pose rows.
pub(crate) fn mean_joint_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    let k = a.len() / 3;
    let sum: S = a
        .chunks_exact(3)
        .zip(b.chunks_exact(3))
        .map(|(p, q)| {
            let (dx, dy, dz) = (p[0] - q[0], p[1] - q[1], p[2] - q[2]);
            (dx * dx + dy * dy + dz * dz).sqrt()
        })
        .sum();
    sum / S::of(k as f64)
}

/// Mean per-joint distance over every row.
fn mean_distance<S: Scalar>(pred: &Matrix<S>, gt: &Matrix<S>) -> S {
    if pred.rows() == 0 {
        return S::zero();
    }
    let sum: S = (0..pred.rows())
        .map(|r| mean_joint_distance(pred.row(r), gt.row(r)))
        .sum();
    sum / S::of(pred.rows() as f64)
}

/// Adds `scale · d‖p − q‖/dp` into `grad` for every joint of every row.
/// The gradient at a zero difference is taken as zero.
fn accumulate_distance_grad<S: Scalar>(
    pred: &Matrix<S>,
    gt: &Matrix<S>,
    scale: S,
    grad: &mut Matrix<S>,
) {
    for r in 0..pred.rows() {
        let (p, q) = (pred.row(r), gt.row(r));
        let g = grad.row_mut(r);
        for j in 0..p.len() / 3 {
            let d = [
                p[3 * j] - q[3 * j],
                p[3 * j + 1] - q[3 * j + 1],
                p[3 * j + 2] - q[3 * j + 2],
            ];
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if norm > S::zero() {
                for a in 0..3 {
                    g[3 * j + a] = g[3 * j + a] + scale * d[a] / norm;
                }
            }
        }
    }
}

fn velocities<S: Scalar>(x: &Matrix<S>) -> Matrix<S> {
    Matrix::from_fn(x.rows().saturating_sub(1), x.cols(), |r, c| {
        x.get(r + 1, c) - x.get(r, c)
    })
}

/// Position term: mean over the N·K (frame, joint) pairs of the 3-D error.
pub fn loss_re<S: Scalar>(pred: &Matrix<S>, gt: &Matrix<S>) -> Result<S> {
    check_pair("loss_re", pred, gt)?;
    Ok(mean_distance(pred, gt))
}

/// Velocity term over the N−1 adjacent-frame differences inside the window.
/// Zero when N < 2.
pub fn loss_v<S: Scalar>(pred: &Matrix<S>, gt: &Matrix<S>) -> Result<S> {
    check_pair("loss_v", pred, gt)?;
    Ok(mean_distance(&velocities(pred), &velocities(gt)))
}

/// `w_re · L_re + w_v · L_v` and its gradient with respect to `pred`.
pub fn total_loss<S: Scalar>(
    weights: &LossWeights,
    pred: &Matrix<S>,
    gt: &Matrix<S>,
) -> Result<(LossValue<S>, Matrix<S>)> {
    check_pair("total_loss", pred, gt)?;
    let (n, c) = pred.shape();
    let k = c / 3;
    let (w_re, w_v) = (S::of(weights.w_re), S::of(weights.w_v));
    let mut grad = Matrix::zeros(n, c);

    let re = mean_distance(pred, gt);
    if n > 0 && k > 0 {
        accumulate_distance_grad(pred, gt, w_re / S::of((n * k) as f64), &mut grad);
    }

    let velocity_defined = n >= 2;
    let mut v = S::zero();
    if velocity_defined && k > 0 {
        let (vp, vg) = (velocities(pred), velocities(gt));
        v = mean_distance(&vp, &vg);
        let mut gv = Matrix::zeros(n - 1, c);
        accumulate_distance_grad(&vp, &vg, w_v / S::of(((n - 1) * k) as f64), &mut gv);
        for r in 0..n - 1 {
            for j in 0..c {
                let g = gv.get(r, j);
                grad.set(r + 1, j, grad.get(r + 1, j) + g);
                grad.set(r, j, grad.get(r, j) - g);
            }
        }
    }

    Ok((
        LossValue {
            total: w_re * re + w_v * v,
            re,
            v,
            velocity_defined,
        },
        grad,
    ))
}
