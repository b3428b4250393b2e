//! Dense row-major matrices just big enough for layered networks.
//!
//! Everything here is deliberately plain `Vec<Vec<f64>>` arithmetic: the
//! networks built in this crate are small (widths in the thousands at most)
//! and the serialization format stores weights row by row anyway.

use crate::error::{Error, Result};

/// A matrix as a list of rows. Rows must all have the same length.
pub type Matrix = Vec<Vec<f64>>;

/// ∞-operator norm of a matrix: the maximum 1-norm over its rows,
/// `max_i Σ_j |a_ij|`.
pub fn op_norm_inf(a: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || a[0].is_empty() {
        return Err(Error::EmptyMatrix("op_norm_inf needs at least one entry"));
    }
    Ok(a.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// ∞-operator norm of the augmented matrix `(A, b)`: row sums include the
/// bias column.
pub fn op_norm_inf_augmented(a: &[Vec<f64>], b: &[f64]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "augmented norm: {} rows vs {} bias entries",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(row, bi)| row.iter().map(|v| v.abs()).sum::<f64>() + bi.abs())
        .fold(0.0, f64::max))
}

/// `y = A x` for a row-major matrix.
pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(w, xi)| w * xi).sum())
        .collect()
}

/// `C = A B` for row-major matrices (rows(A) x cols(B)).
pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Matrix {
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(aik, brow)| aik * brow[j]).sum())
                .collect()
        })
        .collect()
}

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Zero matrix with the given shape.
pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![0.0; cols]; rows]
}

/// Least-squares slope and intercept of `y` against `x`, with the residual
/// sum of squares of the fit.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Precondition(format!(
            "linear fit needs >= 2 points, got {}",
            x.len().min(y.len())
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition(
            "linear fit: all abscissae identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    Ok((slope, intercept, rss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn op_norm_is_max_row_sum() {
        let a = vec![vec![1.0, -2.0], vec![3.0, 0.5]];
        assert_relative_eq!(op_norm_inf(&a).unwrap(), 3.5);
    }

    #[test]
    fn op_norm_identity_is_one() {
        assert_relative_eq!(op_norm_inf(&identity(3)).unwrap(), 1.0);
    }

    #[test]
    fn op_norm_zero_matrix() {
        assert_eq!(op_norm_inf(&[vec![0.0, 0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn op_norm_rejects_empty() {
        assert!(op_norm_inf(&[]).is_err());
        let empty_row: Vec<Vec<f64>> = vec![vec![]];
        assert!(op_norm_inf(&empty_row).is_err());
    }

    #[test]
    fn augmented_norm_counts_bias() {
        let a = vec![vec![1.0, -1.0], vec![0.5, 0.0]];
        let b = vec![-1.0, 0.25];
        assert_relative_eq!(op_norm_inf_augmented(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn fit_recovers_slope() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, b, rss) = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(s, 2.5, epsilon = 1e-12);
        assert_relative_eq!(b, -1.0, epsilon = 1e-12);
        assert!(rss < 1e-20);
    }
}
