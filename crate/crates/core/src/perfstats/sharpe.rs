use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{auto_lag, bartlett_covariance, StatsError, TRADING_DAYS};
use crate::series::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpeTest {
    /// Annualized Sharpe ratios.
    pub sharpe_a: f64,
    pub sharpe_b: f64,
    pub statistic: f64,
    pub p_value: f64,
    /// True when the samples share dates and were tested jointly.
    pub paired: bool,
}

/// Gradient of `μ/√(μ₂ − μ²)` in `(μ, μ₂)` and the Sharpe ratio itself.
fn sharpe_and_gradient(r: &[f64]) -> Option<(f64, [f64; 2])> {
    let n = r.len() as f64;
    let mu = r.iter().sum::<f64>() / n;
    let mu2 = r.iter().map(|x| x * x).sum::<f64>() / n;
    let var = mu2 - mu * mu;
    if var <= 0.0 {
        return None;
    }
    let sd = var.sqrt();
    Some((mu / sd, [mu2 / (sd * var), -mu / (2.0 * sd * var)]))
}

/// HAC covariance of the sample means of the moment columns.
fn mean_covariance(columns: &[&[f64]]) -> DMatrix<f64> {
    let t = columns[0].len();
    let p = columns.len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / t as f64).collect();
    let z = DMatrix::from_fn(t, p, |i, j| columns[j][i] - means[j]);
    bartlett_covariance(&z, auto_lag(t)) / (t as f64 * t as f64)
}

fn moment_columns(r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (r.to_vec(), r.iter().map(|x| x * x).collect())
}

/// Delta-method test of equal daily Sharpe ratios using Bartlett HAC
/// covariances of `(r, r²)`. Samples sharing dates are tested jointly on the
/// common dates; disjoint samples are treated as independent.
pub fn sharpe_difference_test(a: &ReturnSeries, b: &ReturnSeries) -> Result<SharpeTest, StatsError> {
    let (dates, ra, rb) = a.align(b);
    let paired = !dates.is_empty();
    let (ra, rb) = if paired { (ra, rb) } else { (a.values.clone(), b.values.clone()) };
    for r in [&ra, &rb] {
        if r.len() < 3 {
            return Err(StatsError::TooFew { needed: 3, have: r.len() });
        }
    }
    let (Some((sa, ga)), Some((sb, gb))) = (sharpe_and_gradient(&ra), sharpe_and_gradient(&rb)) else {
        return Err(StatsError::TooFew { needed: 2, have: 1 });
    };
    let var = if paired {
        let (a1, a2) = moment_columns(&ra);
        let (b1, b2) = moment_columns(&rb);
        let cov = mean_covariance(&[&a1, &a2, &b1, &b2]);
        let g = DVector::from_vec(vec![ga[0], ga[1], -gb[0], -gb[1]]);
        (g.transpose() * cov * &g)[(0, 0)]
    } else {
        let quad = |r: &[f64], g: [f64; 2]| {
            let (c1, c2) = moment_columns(r);
            let cov = mean_covariance(&[&c1, &c2]);
            let g = DVector::from_vec(g.to_vec());
            (g.transpose() * cov * &g)[(0, 0)]
        };
        quad(&ra, ga) + quad(&rb, gb)
    };
    let diff = sa - sb;
    let statistic = if diff == 0.0 { 0.0 } else if var > 0.0 { diff / var.sqrt() } else { f64::INFINITY.copysign(diff) };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = 2.0 * (1.0 - normal.cdf(statistic.abs()));
    let ann = TRADING_DAYS.sqrt();
    Ok(SharpeTest { sharpe_a: sa * ann, sharpe_b: sb * ann, statistic, p_value, paired })
}
