//! Block Thomas algorithm for 2×2 block tridiagonal systems.

use nalgebra::{Matrix2, Vector2};

/// Solves `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n−1]` are ignored. Returns `None` when a pivot
/// block is singular.
pub fn solve(
    lower: &[Matrix2<f64>],
    diag: &[Matrix2<f64>],
    upper: &[Matrix2<f64>],
    rhs: &[Vector2<f64>],
) -> Option<Vec<Vector2<f64>>> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![Matrix2::zeros(); n];
    let mut d = vec![Vector2::zeros(); n];
    let inv = diag[0].try_inverse()?;
    c[0] = inv * upper[0];
    d[0] = inv * rhs[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        let inv = m.try_inverse()?;
        c[i] = inv * upper[i];
        d[i] = inv * (rhs[i] - lower[i] * d[i - 1]);
    }
    let mut x = vec![Vector2::zeros(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}
