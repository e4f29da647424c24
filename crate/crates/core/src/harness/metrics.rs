//! Spectral-norm relative error.

use nalgebra::DMatrix;

use crate::error::{Result, VltError};
use crate::fields::ScalarField;

/// Largest singular value of the field viewed as an `n x n` matrix.
pub fn spectral_norm(h: &ScalarField) -> f64 {
    let n = h.n();
    if h.max_abs() == 0.0 {
        return 0.0;
    }
    DMatrix::from_row_slice(n, n, h.values())
        .singular_values()
        .iter()
        .fold(0.0, |a: f64, &s| a.max(s))
}

/// `100 * ||a - b||_2 / ||a||_2`, with `a` the reference.
pub fn relative_error_spectral(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.ensure_same_grid(b)?;
    let denom = spectral_norm(a);
    if denom == 0.0 {
        return Err(VltError::ZeroReference);
    }
    Ok(100.0 * spectral_norm(&(a - b)) / denom)
}
