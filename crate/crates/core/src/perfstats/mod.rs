//! Performance statistics, Newey-West regressions and conditional splits.

mod conditional;
mod regression;
mod sharpe;

use chrono::{Datelike, Weekday};
use serde::Serialize;

pub use conditional::{conditional_perf, weekday_perf, ConditionalReport, WeekdayRow};
pub use regression::{
    auto_lag, bartlett_covariance, nw_regression, predictive_regression, spanning, Frequency, Lag, RegressionReport,
};
pub use sharpe::{sharpe_difference_test, SharpeTest};

use crate::series::ReturnSeries;

pub const TRADING_DAYS: f64 = 252.0;
pub const RISK_AVERSION: f64 = 5.0;
/// Lower 1% standard normal quantile.
pub const Z99: f64 = -2.32635;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("perfstats: need at least {needed} observations, have {have}")]
    TooFew { needed: usize, have: usize },
    #[error("perfstats: collinear regressors: {}", columns.join(", "))]
    Collinear { columns: Vec<String> },
    #[error("perfstats: lag {lag} must be below the sample size {n}")]
    Lag { lag: usize, n: usize },
    #[error("perfstats: no overlapping observations")]
    NoOverlap,
}

/// Table-style summary of a daily excess-return series. Ratios that divide
/// by a zero dispersion are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfSummary {
    pub observations: usize,
    pub ann_mean_geometric: f64,
    pub ann_mean_arithmetic: f64,
    pub mean_t_stat: Option<f64>,
    pub ann_volatility: f64,
    pub ann_downside_volatility: f64,
    pub sharpe: Option<f64>,
    pub sortino: Option<f64>,
    pub omega: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    /// Daily 99% Cornish-Fisher value-at-risk as a positive loss.
    pub var99_cornish_fisher: f64,
    pub pct_positive_months: Option<f64>,
    pub max_drawdown: f64,
    pub cer: f64,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn sample_sd(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)).sqrt()
}

/// Population skewness and excess kurtosis; `None` for a constant sample.
pub fn moments(x: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return None;
    }
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    Some((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
}

/// `−(μ + σ·z_cf)` with the Cornish-Fisher adjusted 1% quantile.
pub fn cornish_fisher_var(mu: f64, sigma: f64, skew: f64, excess_kurt: f64) -> f64 {
    let z = Z99;
    let zcf = z + (z * z - 1.0) * skew / 6.0 + (z.powi(3) - 3.0 * z) * excess_kurt / 24.0
        - (2.0 * z.powi(3) - 5.0 * z) * skew * skew / 36.0;
    -(mu + sigma * zcf)
}

/// Power-utility certainty-equivalent return, annualized with `n` periods.
pub fn certainty_equivalent(r: &[f64], gamma: f64, n: f64) -> f64 {
    let t = r.len() as f64;
    let u: f64 = if (gamma - 1.0).abs() < 1e-15 {
        r.iter().map(|x| x.ln_1p()).sum()
    } else {
        r.iter().map(|x| ((1.0 + x).powf(1.0 - gamma) - 1.0) / (1.0 - gamma)).sum()
    };
    n / t * u
}

/// Largest peak-to-trough fall of cumulative wealth starting at 1, as a value in [−1, 0].
pub fn max_drawdown(r: &[f64]) -> f64 {
    let (mut wealth, mut peak, mut worst) = (1.0f64, 1.0f64, 0.0f64);
    for x in r {
        wealth *= 1.0 + x;
        peak = peak.max(wealth);
        worst = worst.min(wealth / peak - 1.0);
    }
    worst
}

/// Knobs of [`summarize_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    pub periods_per_year: f64,
    pub risk_aversion: f64,
    pub lag: Lag,
    /// Sample-size corrected skewness and excess kurtosis instead of population moments.
    pub bias_corrected: bool,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self { periods_per_year: TRADING_DAYS, risk_aversion: RISK_AVERSION, lag: Lag::Auto, bias_corrected: false }
    }
}

pub fn summarize(returns: &ReturnSeries) -> Result<PerfSummary, StatsError> {
    summarize_with(returns, &SummaryOptions::default())
}

/// Adjusts population skewness and excess kurtosis for sample size.
pub fn bias_correct(skew: f64, excess_kurt: f64, n: usize) -> Option<(f64, f64)> {
    if n < 4 {
        return None;
    }
    let n = n as f64;
    let g1 = skew * (n * (n - 1.0)).sqrt() / (n - 2.0);
    let g2 = ((n + 1.0) * excess_kurt + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    Some((g1, g2))
}

pub fn summarize_with(returns: &ReturnSeries, options: &SummaryOptions) -> Result<PerfSummary, StatsError> {
    let (n, gamma) = (options.periods_per_year, options.risk_aversion);
    let r = &returns.values;
    let t = r.len();
    if t < 2 {
        return Err(StatsError::TooFew { needed: 2, have: t });
    }
    let mu = mean(r);
    let sd = sample_sd(r);
    let growth: f64 = r.iter().map(|x| (1.0 + x).ln()).sum::<f64>();
    let ann_mean_geometric = (growth * n / t as f64).exp_m1();
    let ann_volatility = n.sqrt() * sd;
    let ann_downside_volatility = n.sqrt() * (r.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>() / t as f64).sqrt();
    let arith = n * mu;
    let ratio = |den: f64| (den > 0.0).then(|| arith / den);
    let gains: f64 = r.iter().map(|x| x.max(0.0)).sum();
    let losses: f64 = r.iter().map(|x| (-x).max(0.0)).sum();
    let mom = match moments(r) {
        Some((s, k)) if options.bias_corrected => bias_correct(s, k, t),
        other => other,
    };
    let (s, k) = mom.unwrap_or((0.0, 0.0));
    let pct_positive_months = (t >= 21).then(|| {
        let m = returns.monthly();
        m.iter().filter(|(_, v)| *v > 0.0).count() as f64 / m.len() as f64
    });
    let mean_t_stat = nw_regression(r, &[], true, options.lag, n)
        .ok()
        .and_then(|rep| rep.t_stats[0]);
    Ok(PerfSummary {
        observations: t,
        ann_mean_geometric,
        ann_mean_arithmetic: arith,
        mean_t_stat,
        ann_volatility,
        ann_downside_volatility,
        sharpe: ratio(ann_volatility),
        sortino: ratio(ann_downside_volatility),
        omega: (losses > 0.0).then(|| gains / losses),
        skewness: mom.map(|m| m.0),
        excess_kurtosis: mom.map(|m| m.1),
        var99_cornish_fisher: cornish_fisher_var(mu, sd, s, k),
        pct_positive_months,
        max_drawdown: max_drawdown(r),
        cer: certainty_equivalent(r, gamma, n),
    })
}

/// Cumulative value of one unit invested, adding `risk_free` on matching dates.
pub fn wealth_curve(returns: &ReturnSeries, risk_free: Option<&ReturnSeries>) -> ReturnSeries {
    let rf = risk_free.map(|s| s.as_map()).unwrap_or_default();
    let mut w = 1.0;
    ReturnSeries::from_pairs(returns.iter().map(|(d, r)| {
        w *= 1.0 + r + rf.get(&d).copied().unwrap_or(0.0);
        (d, w)
    }))
}

pub(crate) fn weekday_index(w: Weekday) -> Option<usize> {
    match w {
        Weekday::Sat | Weekday::Sun => None,
        other => Some(other.num_days_from_monday() as usize),
    }
}

pub(crate) fn weekday_of(d: chrono::NaiveDate) -> Weekday {
    d.weekday()
}
