use std::fmt;

use super::Scalar;
use crate::error::{Error, Result};

/// Dense row-major 2-D matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S = f32> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidSize(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape("from_rows", (1, cols), (1, r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        gemm(self, false, rhs, false)
    }

    pub fn transpose(&self) -> Matrix<S> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.data[i * self.cols + j]);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// Copy of rows `start..start + len`.
    pub fn slice_rows(&self, start: usize, len: usize) -> Result<Matrix<S>> {
        if start + len > self.rows {
            return Err(Error::IndexOutOfRange {
                index: start + len,
                len: self.rows,
            });
        }
        Ok(Matrix {
            rows: len,
            cols: self.cols,
            data: self.data[start * self.cols..(start + len) * self.cols].to_vec(),
        })
    }

    /// Stacks matrices with equal column count on top of each other.
    pub fn vstack(parts: &[Matrix<S>]) -> Result<Matrix<S>> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut data = Vec::with_capacity(parts.iter().map(|m| m.data.len()).sum());
        let mut rows = 0;
        for m in parts {
            if m.cols != cols {
                return Err(Error::shape("vstack", (rows, cols), m.shape()));
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Splits into consecutive blocks of `block_rows` rows each.
    pub fn split_rows(&self, block_rows: usize) -> Result<Vec<Matrix<S>>> {
        self.check_blocks("split_rows", block_rows)?;
        Ok(self
            .data
            .chunks(block_rows * self.cols)
            .map(|chunk| Matrix {
                rows: block_rows,
                cols: self.cols,
                data: chunk.to_vec(),
            })
            .collect())
    }

    /// Transposes each vertical block of `block_rows` rows independently and
    /// restacks the results. Used to move a stacked batch between the
    /// temporal and spatial layouts.
    pub fn block_transpose(&self, block_rows: usize) -> Result<Matrix<S>> {
        self.check_blocks("block_transpose", block_rows)?;
        let blocks = self.rows / block_rows;
        let mut out = Vec::with_capacity(self.data.len());
        for b in 0..blocks {
            let base = b * block_rows * self.cols;
            for j in 0..self.cols {
                for i in 0..block_rows {
                    out.push(self.data[base + i * self.cols + j]);
                }
            }
        }
        Ok(Matrix {
            rows: blocks * self.cols,
            cols: block_rows,
            data: out,
        })
    }

    /// Left-multiplies each vertical block of `self` by `lhs`
    /// (block height is `lhs.cols()`).
    pub fn block_left_matmul(&self, lhs: &Matrix<S>) -> Result<Matrix<S>> {
        let block_rows = lhs.cols;
        if block_rows == 0 || self.rows % block_rows != 0 {
            return Err(Error::shape("block_left_matmul", lhs.shape(), self.shape()));
        }
        let blocks = self.rows / block_rows;
        let mut out = Matrix::<S>::zeros(blocks * lhs.rows, self.cols);
        let in_stride = block_rows * self.cols;
        let out_stride = lhs.rows * self.cols;
        for b in 0..blocks {
            // SAFETY: each block is a contiguous lhs.cols x cols (input) or
            // lhs.rows x cols (output) row-major region inside its buffer.
            unsafe {
                S::gemm_raw(
                    lhs.rows,
                    lhs.cols,
                    self.cols,
                    S::one(),
                    lhs.data.as_ptr(),
                    lhs.cols as isize,
                    1,
                    self.data.as_ptr().add(b * in_stride),
                    self.cols as isize,
                    1,
                    S::zero(),
                    out.data.as_mut_ptr().add(b * out_stride),
                    self.cols as isize,
                    1,
                );
            }
        }
        Ok(out)
    }

    pub fn map(&self, mut f: impl FnMut(S) -> S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        self.zip_with("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        self.zip_with("sub", rhs, |a, b| a - b)
    }

    pub fn scale(&self, k: S) -> Matrix<S> {
        self.map(|v| v * k)
    }

    pub fn add_assign(&mut self, rhs: &Matrix<S>) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape("add_assign", self.shape(), rhs.shape()));
        }
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a = *a + b;
        }
        Ok(())
    }

    /// Sum over rows, one entry per column.
    pub fn column_sums(&self) -> Vec<S> {
        let mut sums = vec![S::zero(); self.cols];
        for row in self.data.chunks(self.cols.max(1)) {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s = *s + v;
            }
        }
        sums
    }

    /// Largest absolute elementwise difference; shapes must agree.
    pub fn max_abs_diff(&self, rhs: &Matrix<S>) -> Result<S> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape("max_abs_diff", self.shape(), rhs.shape()));
        }
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max))
    }

    pub fn frobenius_norm(&self) -> S {
        self.data.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    pub fn cast<T: Scalar>(&self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| T::of(v.f64())).collect(),
        }
    }

    fn zip_with(
        &self,
        op: &'static str,
        rhs: &Matrix<S>,
        f: impl Fn(S, S) -> S,
    ) -> Result<Matrix<S>> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(op, self.shape(), rhs.shape()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn check_blocks(&self, op: &'static str, block_rows: usize) -> Result<()> {
        if block_rows == 0 || self.rows % block_rows != 0 {
            return Err(Error::shape(op, self.shape(), (block_rows, self.cols)));
        }
        Ok(())
    }
}

/// `op(a) · op(b)` where `op` optionally transposes, without materializing
/// the transposed operand.
pub fn gemm<S: Scalar>(
    a: &Matrix<S>,
    transpose_a: bool,
    b: &Matrix<S>,
    transpose_b: bool,
) -> Result<Matrix<S>> {
    let (m, ka, rsa, csa) = if transpose_a {
        (a.cols, a.rows, 1, a.cols as isize)
    } else {
        (a.rows, a.cols, a.cols as isize, 1)
    };
    let (kb, n, rsb, csb) = if transpose_b {
        (b.cols, b.rows, 1, b.cols as isize)
    } else {
        (b.rows, b.cols, b.cols as isize, 1)
    };
    if ka != kb {
        return Err(Error::shape("matmul", (m, ka), (kb, n)));
    }
    let mut out = Matrix::zeros(m, n);
    if m == 0 || n == 0 || ka == 0 {
        return Ok(out);
    }
    // SAFETY: extents and strides are derived from the matrices' own shapes.
    unsafe {
        S::gemm_raw(
            m,
            ka,
            n,
            S::one(),
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            S::zero(),
            out.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(out)
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(6) {
            let row = &self.data[r * self.cols..r * self.cols + self.cols.min(8)];
            write!(f, "\n  {row:?}")?;
        }
        if self.rows > 6 {
            write!(f, "\n  ...")?;
        }
        write!(f, "]")
    }
}
