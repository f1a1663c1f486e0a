//! Orthonormal type-II DCT basis applied along the temporal (row) axis.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Scalar};

/// `forward` is the T×T DCT matrix; `inverse` is its transpose, which is the
/// exact inverse because the basis is orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis<S = f32> {
    size: usize,
    forward: Matrix<S>,
    inverse: Matrix<S>,
}

impl<S: Scalar> DctBasis<S> {
    /// `D[i][j] = sqrt(2/T) / sqrt(1 + [i == 0]) * cos(pi * (2j + 1) * i / (2T))`,
    /// evaluated in f64 and rounded once to `S`.
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSize(
                "DCT basis size must be at least 1".into(),
            ));
        }
        let t = size as f64;
        let scale = (2.0 / t).sqrt();
        let forward = Matrix::from_fn(size, size, |i, j| {
            let norm = if i == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
            S::of(scale * norm * (PI * (2 * j + 1) as f64 * i as f64 / (2.0 * t)).cos())
        });
        let inverse = forward.transpose();
        Ok(Self {
            size,
            forward,
            inverse,
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self) -> &Matrix<S> {
        &self.forward
    }

    pub fn inverse(&self) -> &Matrix<S> {
        &self.inverse
    }

    /// `D · x` for a T×C sequence.
    pub fn apply_dct(&self, x: &Matrix<S>) -> Result<Matrix<S>> {
        self.check_rows("apply_dct", x)?;
        self.forward.matmul(x)
    }

    /// `D⁻¹ · y` for a T×C coefficient matrix.
    pub fn apply_idct(&self, y: &Matrix<S>) -> Result<Matrix<S>> {
        self.check_rows("apply_idct", y)?;
        self.inverse.matmul(y)
    }

    /// [`apply_dct`](Self::apply_dct) on every T-row block of a stacked batch.
    pub fn apply_dct_stacked(&self, x: &Matrix<S>) -> Result<Matrix<S>> {
        x.block_left_matmul(&self.forward)
    }

    /// [`apply_idct`](Self::apply_idct) on every T-row block of a stacked batch.
    pub fn apply_idct_stacked(&self, y: &Matrix<S>) -> Result<Matrix<S>> {
        y.block_left_matmul(&self.inverse)
    }

    fn check_rows(&self, op: &'static str, x: &Matrix<S>) -> Result<()> {
        if x.rows() != self.size {
            return Err(Error::shape(op, (self.size, self.size), x.shape()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, r: usize, c: usize) -> Matrix<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn size_one_is_unit() {
        let b = DctBasis::<f64>::new(1).unwrap();
        assert!((b.forward().get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn size_two_by_hand() {
        let b = DctBasis::<f32>::new(2).unwrap();
        let h = std::f32::consts::FRAC_1_SQRT_2;
        let expect = [h, h, h, -h];
        for (a, e) in b.forward().data().iter().zip(expect) {
            assert!((a - e).abs() < 1e-6, "{a} vs {e}");
        }
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(matches!(
            DctBasis::<f32>::new(0),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn orthonormal_for_standard_sizes() {
        for t in [1, 2, 10, 50] {
            let b = DctBasis::<f32>::new(t).unwrap();
            let prod = b.forward().matmul(&b.forward().transpose()).unwrap();
            assert!(
                prod.max_abs_diff(&Matrix::identity(t)).unwrap() < 1e-5,
                "T={t}"
            );
            let b64 = DctBasis::<f64>::new(t).unwrap();
            let prod = b64.forward().matmul(b64.inverse()).unwrap();
            assert!(
                prod.max_abs_diff(&Matrix::identity(t)).unwrap() < 1e-10,
                "T={t}"
            );
        }
    }

    #[test]
    fn constant_sequence_concentrates_in_row_zero() {
        let t = 50;
        let b = DctBasis::<f64>::new(t).unwrap();
        let consts = [1.5, -2.0, 0.0, 10.0];
        let x = Matrix::from_fn(t, consts.len(), |_, j| consts[j]);
        let y = b.apply_dct(&x).unwrap();
        for (j, &c) in consts.iter().enumerate() {
            assert!((y.get(0, j) - (t as f64).sqrt() * c).abs() < 1e-10);
            for i in 1..t {
                assert!(y.get(i, j).abs() < 1e-10);
            }
        }
        let back = b.apply_idct(&y).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() < 1e-10);
    }

    #[test]
    fn zeros_map_to_zeros() {
        let b = DctBasis::<f32>::new(7).unwrap();
        let z = Matrix::zeros(7, 3);
        assert_eq!(b.apply_dct(&z).unwrap(), z);
        assert_eq!(b.apply_idct(&z).unwrap(), z);
    }

    #[test]
    fn row_mismatch_is_a_shape_error() {
        let b = DctBasis::<f32>::new(5).unwrap();
        assert!(matches!(
            b.apply_dct(&Matrix::zeros(4, 2)),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            b.apply_idct(&Matrix::zeros(6, 2)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn roundtrip_50x66() {
        let b = DctBasis::<f32>::new(50).unwrap();
        let x = random(9, 50, 66);
        let back = b.apply_idct(&b.apply_dct(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() < 1e-4);
    }

    proptest! {
        #[test]
        fn linear(t in 1usize..30, c in 1usize..6, a in -3.0f32..3.0, k in -3.0f32..3.0, seed: u64) {
            let b = DctBasis::<f32>::new(t).unwrap();
            let x = random(seed, t, c);
            let y = random(seed ^ 0xdead, t, c);
            let lhs = b.apply_dct(&x.scale(a).add(&y.scale(k)).unwrap()).unwrap();
            let rhs = b.apply_dct(&x).unwrap().scale(a).add(&b.apply_dct(&y).unwrap().scale(k)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-5);
        }

        #[test]
        fn preserves_energy(t in 1usize..60, c in 1usize..8, seed: u64) {
            let b = DctBasis::<f32>::new(t).unwrap();
            let x = random(seed, t, c);
            let n0 = x.frobenius_norm();
            let n1 = b.apply_dct(&x).unwrap().frobenius_norm();
            prop_assert!((n0 - n1).abs() <= 1e-4 * n0.max(1e-6));
        }

        #[test]
        fn roundtrip(t in 1usize..60, c in 1usize..8, seed: u64) {
            let b = DctBasis::<f32>::new(t).unwrap();
            let x = random(seed, t, c);
            let back = b.apply_idct(&b.apply_dct(&x).unwrap()).unwrap();
            prop_assert!(back.max_abs_diff(&x).unwrap() < 1e-4);
        }
    }
}
