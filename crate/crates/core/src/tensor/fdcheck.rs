use crate::error::{Error, Result};

/// Central-difference gradient check.
///
/// Returns the maximum over coordinates of
/// `|g_fd - g_an| / max(1e-12, |g_fd| + |g_an|)`.
pub fn fd_check<F>(mut f: F, theta: &[f64], analytic: &[f64], h: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Config(format!("step h must be positive, got {h}")));
    }
    if theta.len() != analytic.len() {
        return Err(Error::shape(
            "fd_check",
            (1, theta.len()),
            (1, analytic.len()),
        ));
    }
    let mut probe = theta.to_vec();
    let mut worst = 0.0f64;
    for (i, &g_an) in analytic.iter().enumerate() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Evaluation(i));
        }
        let g_fd = (plus - minus) / (2.0 * h);
        let rel = (g_fd - g_an).abs() / (g_fd.abs() + g_an.abs()).max(1e-12);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let err = fd_check(|t| t[0] * t[0], &[3.0], &[6.0], 1e-5).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant_function_has_zero_error() {
        let err = fd_check(|_| 7.5, &[1.0, -2.0], &[0.0, 0.0], 1e-5).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn doubled_gradient_is_flagged() {
        let err = fd_check(|t| t[0] * t[0], &[3.0], &[12.0], 1e-5).unwrap();
        assert!((err - 1.0 / 3.0).abs() < 1e-8, "{err}");
    }

    #[test]
    fn non_finite_value_is_an_error() {
        let err = fd_check(|t| 1.0 / (t[0] - 1e-5), &[0.0], &[0.0], 1e-5).unwrap_err();
        assert!(matches!(err, Error::Evaluation(0)));
    }

    #[test]
    fn rejects_non_positive_step() {
        assert!(fd_check(|t| t[0], &[0.0], &[1.0], 0.0).is_err());
    }
}
