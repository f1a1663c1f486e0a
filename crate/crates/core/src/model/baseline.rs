use crate::error::{Error, Result};
use crate::tensor::{Matrix, Scalar};

/// Repeats the final observed frame `output_len` times.
pub fn last_frame_baseline<S: Scalar>(x: &Matrix<S>, output_len: usize) -> Result<Matrix<S>> {
    if x.rows() == 0 {
        return Err(Error::EmptyInput(
            "last-frame baseline needs at least one frame".into(),
        ));
    }
    let last = x.row(x.rows() - 1);
    Ok(Matrix::from_fn(output_len, x.cols(), |_, j| last[j]))
}
