//! Nelson-Siegel factor loadings and the daily decay factor.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::{ComponentSet, NsError};

const SMALL_X: f64 = 1e-6;

/// `(1 - e^{-x}) / x`, the slope loading at `x = λM`.
pub fn slope_loading_x(x: f64) -> f64 {
    if x.abs() < SMALL_X {
        return 1.0 - x / 2.0 + x * x / 6.0;
    }
    -(-x).exp_m1() / x
}

/// `(1 - e^{-x}) / x - e^{-x}`, the curvature loading at `x = λM`.
pub fn curvature_loading_x(x: f64) -> f64 {
    if x.abs() < SMALL_X {
        return x / 2.0 - x * x / 3.0;
    }
    slope_loading_x(x) - (-x).exp()
}

pub fn slope_loading(lambda: f64, maturity: f64) -> f64 {
    slope_loading_x(lambda * maturity)
}

pub fn curvature_loading(lambda: f64, maturity: f64) -> f64 {
    curvature_loading_x(lambda * maturity)
}

/// First-order condition of the curvature loading in `x`: zero at its maximum.
fn curvature_foc(x: f64) -> f64 {
    (-x).exp() * (1.0 + x + x * x) - 1.0
}

/// Positive root of `e^{-x}(1 + x + x^2) = 1`, where the curvature loading peaks.
pub fn curvature_peak() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        // f > 0 on (0, x*) and f < 0 beyond it
        let (mut lo, mut hi) = (0.5_f64, 5.0_f64);
        debug_assert!(curvature_foc(lo) > 0.0 && curvature_foc(hi) < 0.0);
        loop {
            let mid = 0.5 * (lo + hi);
            let f = curvature_foc(mid);
            if f.abs() < 1e-12 && (hi - lo) < 1e-12 || mid == lo || mid == hi {
                return mid;
            }
            if f > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    })
}

/// Decay factor that maximizes the curvature loading at the average maturity.
pub fn decay_factor(avg_maturity_months: f64) -> Result<f64, NsError> {
    if !(avg_maturity_months > 0.0) || !avg_maturity_months.is_finite() {
        return Err(NsError::Domain(format!(
            "average maturity must be positive, got {avg_maturity_months}"
        )));
    }
    Ok(curvature_peak() / avg_maturity_months)
}

/// Design matrix with a level column and the slope/curvature columns selected
/// by `components`.
pub fn ns_loadings(lambda: f64, maturities: &[f64], components: ComponentSet) -> Result<DMatrix<f64>, NsError> {
    if !(lambda > 0.0) {
        return Err(NsError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if let Some(m) = maturities.iter().find(|m| !(**m > 0.0)) {
        return Err(NsError::Domain(format!("maturities must be positive, got {m}")));
    }
    let p = components.len();
    let mut x = DMatrix::zeros(maturities.len(), p);
    for (i, m) in maturities.iter().enumerate() {
        let mut j = 0;
        x[(i, j)] = 1.0;
        j += 1;
        if components.slope {
            x[(i, j)] = slope_loading(lambda, *m);
            j += 1;
        }
        if components.curvature {
            x[(i, j)] = curvature_loading(lambda, *m);
        }
    }
    Ok(x)
}
