//! Small dense complex matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// Spectral norm (largest singular value).
pub fn norm2(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn norm_fro(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `(A − A^H) / (2i)`.
pub fn skew_part(a: &CMat) -> CMat {
    (a - a.adjoint()) * Complex64::new(0.0, -0.5)
}
