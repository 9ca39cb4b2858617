//! Dense real matrices and the few helpers every module needs.
//!
//! Matrices travel as row-major nested JSON arrays, e.g. `[[1,2],[3,4]]`.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn frobenius(a: &Matrix) -> f64 {
    a.norm()
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// The all-ones matrix `eᵀ ⊗ e`.
pub fn all_ones(n: usize) -> Matrix {
    Matrix::from_element(n, n, 1.0)
}

pub fn ensure_square(a: &Matrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    Ok(a.nrows())
}

/// Both matrices square and of the same size; returns that size.
pub fn ensure_same(a: &Matrix, b: &Matrix) -> Result<usize> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch { expected: n, found: m });
    }
    Ok(n)
}

pub fn is_diagonal(a: &Matrix) -> bool {
    a.nrows() == a.ncols()
        && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == 0.0))
}

pub fn to_rows(a: &Matrix) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from row-major rows. Ragged input is rejected.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "ragged matrix: row of length {} in a matrix with {} columns",
            bad.len(),
            ncols
        )));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_json_value(a: &Matrix) -> serde_json::Value {
    serde_json::json!(to_rows(a))
}

pub fn from_json_str(s: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(s)?;
    from_rows(&rows)
}
