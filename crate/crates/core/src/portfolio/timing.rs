use chrono::NaiveDate;

use crate::nscurve::FitPanel;
use crate::series::ReturnSeries;

/// Sample standard deviation of `β_S` across commodities fitted on `date`.
pub fn dispersion(fits: &FitPanel, date: NaiveDate) -> Option<f64> {
    let betas: Vec<f64> = fits.on(date).map(|p| p.fit.beta_slope).collect();
    sample_sd(&betas)
}

/// Dispersion on every calendar date with at least two fits.
pub fn dispersion_series(fits: &FitPanel) -> ReturnSeries {
    ReturnSeries::from_pairs(fits.calendar.iter().filter_map(|d| dispersion(fits, *d).map(|v| (*d, v))))
}

pub(crate) fn sample_sd(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    Some((x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibration {
    /// One scale over the whole sample.
    FullSample,
    /// Scale re-estimated each day from strictly earlier observations.
    Expanding { min_obs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingConfig {
    /// Trailing window of the dispersion average, in trading days.
    pub window: usize,
    pub calibration: Calibration,
}

impl TimingConfig {
    pub fn new(window: usize) -> Self {
        Self { window, calibration: Calibration::FullSample }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedReturns {
    pub returns: ReturnSeries,
    /// Exposure multiplier `σ̂_t / c` applied to each day's return.
    pub leverage: ReturnSeries,
    /// Final scale `c`, in dispersion units.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TimingError {
    #[error("timing window must be positive")]
    Window,
    #[error("fewer than two timed observations")]
    TooShort,
    #[error("base returns have zero variance on the timed sample")]
    ZeroVariance,
}

/// `r^σ_{t+1} = (σ̂_t / c) · r_{t+1}`, with `σ̂_t` the mean dispersion over the
/// `window` observations ending at `t` and `c` matching the volatility of the
/// timed series to that of `base` on the same dates.
pub fn timed_returns(base: &ReturnSeries, dispersion: &ReturnSeries, config: TimingConfig) -> Result<TimedReturns, TimingError> {
    let d = config.window;
    if d == 0 {
        return Err(TimingError::Window);
    }
    let mut dates = Vec::new();
    let mut sigma = Vec::new();
    let mut raw = Vec::new();
    for i in 1..base.len() {
        let t = base.dates[i - 1];
        let Ok(pos) = dispersion.dates.binary_search(&t) else { continue };
        if pos + 1 < d {
            continue;
        }
        let w = &dispersion.values[pos + 1 - d..=pos];
        sigma.push(anchored_mean(w));
        dates.push(base.dates[i]);
        raw.push(base.values[i]);
    }
    if raw.len() < 2 {
        return Err(TimingError::TooShort);
    }
    // working in units of the average dispersion keeps constant inputs exact
    let unit = anchored_mean(&sigma);
    let s: Vec<f64> = sigma.iter().map(|v| v / unit).collect();
    let x: Vec<f64> = s.iter().zip(&raw).map(|(s, r)| s * r).collect();

    match config.calibration {
        Calibration::FullSample => {
            let sd_r = sample_sd(&raw).unwrap();
            if sd_r == 0.0 {
                return Err(TimingError::ZeroVariance);
            }
            let c = sample_sd(&x).unwrap() / sd_r;
            let values: Vec<f64> = x.iter().map(|v| v / c).collect();
            let leverage: Vec<f64> = s.iter().map(|v| v / c).collect();
            Ok(TimedReturns {
                returns: ReturnSeries::new(dates.clone(), values),
                leverage: ReturnSeries::new(dates, leverage),
                scale: c * unit,
            })
        }
        Calibration::Expanding { min_obs } => {
            let mut out_dates = Vec::new();
            let mut values = Vec::new();
            let mut leverage = Vec::new();
            let mut scale = f64::NAN;
            for j in min_obs.max(2)..x.len() {
                let (Some(sx), Some(sr)) = (sample_sd(&x[..j]), sample_sd(&raw[..j])) else { continue };
                if sr == 0.0 || sx == 0.0 {
                    continue;
                }
                let c = sx / sr;
                out_dates.push(dates[j]);
                values.push(x[j] / c);
                leverage.push(s[j] / c);
                scale = c * unit;
            }
            if values.is_empty() {
                return Err(TimingError::TooShort);
            }
            Ok(TimedReturns {
                returns: ReturnSeries::new(out_dates.clone(), values),
                leverage: ReturnSeries::new(out_dates, leverage),
                scale,
            })
        }
    }
}

/// Mean that reproduces a constant input exactly.
fn anchored_mean(x: &[f64]) -> f64 {
    let first = x[0];
    first + x.iter().map(|v| v - first).sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::business_days;

    fn series(values: Vec<f64>) -> ReturnSeries {
        let dates = business_days(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), values.len());
        ReturnSeries::new(dates, values)
    }

    fn base() -> ReturnSeries {
        series((0..60).map(|i| ((i * 37 % 11) as f64 - 5.0) * 1e-3).collect())
    }

    #[test]
    fn two_point_dispersion() {
        assert_eq!(sample_sd(&[-1.0, 1.0]), Some(2f64.sqrt()));
        assert_eq!(sample_sd(&[3.0, 3.0, 3.0]), Some(0.0));
        assert_eq!(sample_sd(&[1.0]), None);
    }

    #[test]
    fn constant_dispersion_is_identity() {
        let b = base();
        let t = timed_returns(&b, &series(vec![0.37; 60]), TimingConfig::new(5)).unwrap();
        let orig = b.as_map();
        for (d, v) in t.returns.iter() {
            assert_eq!(v, orig[&d]);
        }
        assert_eq!(t.returns.len(), 55);
    }

    #[test]
    fn volatility_matched_and_scale_free() {
        let b = base();
        let disp = series((0..60).map(|i| 1.0 + 0.5 * ((i as f64) * 0.3).sin()).collect());
        let t = timed_returns(&b, &disp, TimingConfig::new(3)).unwrap();
        let orig = b.as_map();
        let matched: Vec<f64> = t.returns.dates.iter().map(|d| orig[d]).collect();
        let (a, o) = (sample_sd(&t.returns.values).unwrap(), sample_sd(&matched).unwrap());
        assert!(((a - o) / o).abs() < 1e-12);

        let scaled = ReturnSeries::new(disp.dates.clone(), disp.values.iter().map(|v| v * 7.3).collect());
        let t2 = timed_returns(&b, &scaled, TimingConfig::new(3)).unwrap();
        for (x, y) in t.returns.values.iter().zip(&t2.returns.values) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
        }
    }

    #[test]
    fn expanding_uses_only_past() {
        let b = base();
        let disp = series((0..60).map(|i| 1.0 + (i as f64) * 0.01).collect());
        let t = timed_returns(&b, &disp, TimingConfig { window: 5, calibration: Calibration::Expanding { min_obs: 20 } }).unwrap();
        assert_eq!(t.returns.len(), 55 - 20);
    }
}
