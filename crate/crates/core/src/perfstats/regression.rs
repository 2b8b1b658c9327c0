use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::StatsError;
use crate::calendar::MonthKey;
use crate::linalg::{dependent_columns, inverse, least_squares};
use crate::nscurve::r_squared;
use crate::series::ReturnSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lag {
    /// `floor(4 (T/100)^{2/9})`.
    Auto,
    Fixed(usize),
}

pub fn auto_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Daily,
    /// Calendar-month compounded.
    Monthly,
}

impl Frequency {
    pub fn periods_per_year(self) -> f64 {
        match self {
            Frequency::Daily => super::TRADING_DAYS,
            Frequency::Monthly => 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    /// Coefficient names; `"alpha"` first when an intercept is included.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `None` when the residual variance is zero.
    pub t_stats: Vec<Option<f64>>,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    /// Intercept times periods per year.
    pub alpha_annualized: Option<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub lag: usize,
    pub observations: usize,
    pub degenerate: bool,
}

/// Bartlett-kernel long-run covariance `Σ_l w_l Γ_l` of the rows of `z`
/// (not demeaned), with `w_l = 1 − l/(lag+1)`.
pub fn bartlett_covariance(z: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let (t, p) = z.shape();
    let mut s = z.transpose() * z;
    for l in 1..=lag.min(t.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let mut gamma = DMatrix::zeros(p, p);
        for i in l..t {
            gamma += z.row(i).transpose() * z.row(i - l);
        }
        s += (&gamma + gamma.transpose()) * w;
    }
    s
}

/// OLS of `y` on the named regressors (plus an intercept) with Newey-West
/// standard errors. `periods_per_year` annualizes the intercept.
pub fn nw_regression(
    y: &[f64],
    regressors: &[(&str, &[f64])],
    intercept: bool,
    lag: Lag,
    periods_per_year: f64,
) -> Result<RegressionReport, StatsError> {
    let t = y.len();
    let k = regressors.len() + usize::from(intercept);
    if k == 0 || t <= k {
        return Err(StatsError::TooFew { needed: k + 1, have: t });
    }
    for (name, col) in regressors {
        assert_eq!(col.len(), t, "regressor '{name}' length differs from y");
    }
    let lag = match lag {
        Lag::Auto => auto_lag(t),
        Lag::Fixed(l) => l,
    };
    if lag >= t {
        return Err(StatsError::Lag { lag, n: t });
    }
    let mut names: Vec<String> = Vec::with_capacity(k);
    if intercept {
        names.push("alpha".into());
    }
    names.extend(regressors.iter().map(|(n, _)| n.to_string()));
    let x = DMatrix::from_fn(t, k, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            regressors[j - usize::from(intercept)].1[i]
        }
    });
    let yv = DVector::from_column_slice(y);
    let fit = least_squares(&x, &yv).map_err(|_| StatsError::Collinear {
        columns: dependent_columns(&x).into_iter().map(|j| names[j].clone()).collect(),
    })?;
    let q_inv = inverse(&(x.transpose() * &x)).ok_or_else(|| StatsError::Collinear { columns: names.clone() })?;
    let z = DMatrix::from_fn(t, k, |i, j| x[(i, j)] * fit.residuals[i]);
    let s = bartlett_covariance(&z, lag);
    let cov = &q_inv * s * &q_inv;

    let r2 = if intercept {
        r_squared(y, fit.rss)
    } else {
        let tss: f64 = y.iter().map(|v| v * v).sum();
        if tss == 0.0 { 1.0 } else { 1.0 - fit.rss / tss }
    };
    let dof = if intercept { k - 1 } else { k };
    let base = if intercept { t - 1 } else { t };
    let adj = 1.0 - (1.0 - r2) * base as f64 / (t - dof - usize::from(intercept)) as f64;
    let scale: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let degenerate = fit.residuals.iter().all(|e| e.abs() <= 1e-14 * scale);
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let t_stats = (0..k)
        .map(|j| (!degenerate && std_errors[j] > 0.0).then(|| fit.coefficients[j] / std_errors[j]))
        .collect();
    Ok(RegressionReport {
        alpha_annualized: intercept.then(|| fit.coefficients[0] * periods_per_year),
        names,
        coefficients: fit.coefficients.iter().copied().collect(),
        std_errors,
        t_stats,
        covariance: cov,
        r_squared: r2,
        adj_r_squared: adj,
        residuals: fit.residuals.iter().copied().collect(),
        lag,
        observations: t,
        degenerate,
    })
}

fn monthly_map(s: &ReturnSeries) -> BTreeMap<MonthKey, f64> {
    s.monthly().into_iter().collect()
}

/// Regression of a strategy on factor returns over their common dates (or
/// common calendar months when `frequency` is monthly).
pub fn spanning(
    strategy: &ReturnSeries,
    factors: &[(&str, &ReturnSeries)],
    frequency: Frequency,
    lag: Lag,
) -> Result<RegressionReport, StatsError> {
    let (y, cols): (Vec<f64>, Vec<Vec<f64>>) = match frequency {
        Frequency::Daily => {
            let maps: Vec<BTreeMap<_, f64>> = factors.iter().map(|(_, s)| s.as_map()).collect();
            common(strategy.as_map(), &maps)
        }
        Frequency::Monthly => {
            let maps: Vec<BTreeMap<_, f64>> = factors.iter().map(|(_, s)| monthly_map(s)).collect();
            common(monthly_map(strategy), &maps)
        }
    };
    if y.is_empty() {
        return Err(StatsError::NoOverlap);
    }
    let regs: Vec<(&str, &[f64])> = factors.iter().zip(&cols).map(|((n, _), c)| (*n, c.as_slice())).collect();
    nw_regression(&y, &regs, true, lag, frequency.periods_per_year())
}

fn common<K: Ord + Copy>(y: BTreeMap<K, f64>, xs: &[BTreeMap<K, f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut out_y = Vec::new();
    let mut cols = vec![Vec::new(); xs.len()];
    for (k, v) in y {
        if xs.iter().all(|m| m.contains_key(&k)) {
            out_y.push(v);
            for (c, m) in cols.iter_mut().zip(xs) {
                c.push(m[&k]);
            }
        }
    }
    (out_y, cols)
}

/// `r_{t+1} = a + b x_t + e_{t+1}`: each return is paired with the predictor
/// on the preceding return date.
pub fn predictive_regression(returns: &ReturnSeries, predictor: &ReturnSeries, lag: Lag) -> Result<RegressionReport, StatsError> {
    let x = predictor.as_map();
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for i in 1..returns.len() {
        if let Some(v) = x.get(&returns.dates[i - 1]) {
            ys.push(returns.values[i]);
            xs.push(*v);
        }
    }
    nw_regression(&ys, &[("predictor", &xs)], true, lag, super::TRADING_DAYS)
}
