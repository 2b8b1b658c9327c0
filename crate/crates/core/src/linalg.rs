//! Small dense least-squares helpers built on nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold below which a design is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: DVector<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
pub struct RankDeficient {
    pub rank: usize,
    pub columns: usize,
}

/// Numerical rank of `x` with a threshold relative to the largest singular value.
pub fn rank(x: &DMatrix<f64>) -> usize {
    if x.ncols() == 0 || x.nrows() == 0 {
        return 0;
    }
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * max).count()
}

/// Ordinary least squares of `y` on the columns of `x`.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares, RankDeficient> {
    let columns = x.ncols();
    if x.nrows() < columns {
        return Err(RankDeficient { rank: x.nrows(), columns });
    }
    // Column scaling keeps the rank test meaningful when regressors have very
    // different magnitudes.
    let scales: Vec<f64> = (0..columns)
        .map(|j| {
            let n = x.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = x.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let svd = scaled.svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let r = svd
        .singular_values
        .iter()
        .filter(|s| max > 0.0 && **s > RANK_TOL * max)
        .count();
    if r < columns {
        return Err(RankDeficient { rank: r, columns });
    }
    let mut coefficients = svd
        .solve(y, 0.0)
        .expect("svd was computed with both U and V");
    for (j, s) in scales.iter().enumerate() {
        coefficients[j] /= s;
    }
    let fitted = x * &coefficients;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    Ok(LeastSquares { coefficients, fitted, residuals, rss })
}

/// Indices of columns that lie (numerically) in the span of the columns
/// preceding them.
pub fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..x.ncols() {
        let mut cols = kept.clone();
        cols.push(j);
        let sub = x.select_columns(cols.iter());
        let mut scaled = sub.clone();
        for c in 0..scaled.ncols() {
            let n = scaled.column(c).norm();
            if n > 0.0 {
                scaled.column_mut(c).unscale_mut(n);
            }
        }
        if rank(&scaled) == cols.len() {
            kept.push(j);
        } else {
            dependent.push(j);
        }
    }
    dependent
}

/// Symmetric inverse via SVD; `None` when singular.
pub fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0]);
        let ls = least_squares(&x, &y).unwrap();
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(ls.rss < 1e-24);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(least_squares(&x, &y).is_err());
        assert_eq!(dependent_columns(&x), vec![1]);
    }
}
