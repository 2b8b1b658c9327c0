use chrono::Weekday;
use serde::Serialize;

use super::{nw_regression, summarize, weekday_index, weekday_of, Lag, PerfSummary, StatsError, TRADING_DAYS};
use crate::series::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub threshold: f64,
    /// Days with the indicator at or above its sample mean.
    pub high: Option<PerfSummary>,
    pub low: Option<PerfSummary>,
    pub high_days: usize,
    pub low_days: usize,
    /// Annualized mean difference, high minus low.
    pub difference: Option<f64>,
    pub t_stat: Option<f64>,
    /// One partition has fewer than two days.
    pub one_sided: bool,
}

/// Splits returns by an external indicator, taking for each return date the
/// latest indicator value on or before it, at the indicator's mean over the
/// matched days.
pub fn conditional_perf(returns: &ReturnSeries, indicator: &ReturnSeries) -> Result<ConditionalReport, StatsError> {
    let mut r = Vec::new();
    let mut x = Vec::new();
    let mut dates = Vec::new();
    let mut j = 0usize;
    for (d, v) in returns.iter() {
        while j < indicator.len() && indicator.dates[j] <= d {
            j += 1;
        }
        if j > 0 {
            dates.push(d);
            r.push(v);
            x.push(indicator.values[j - 1]);
        }
    }
    if r.is_empty() {
        return Err(StatsError::NoOverlap);
    }
    let threshold = super::mean(&x);
    let high: Vec<bool> = x.iter().map(|v| *v >= threshold).collect();
    let part = |want: bool| {
        ReturnSeries::new(
            dates.iter().zip(&high).filter(|(_, h)| **h == want).map(|(d, _)| *d).collect(),
            r.iter().zip(&high).filter(|(_, h)| **h == want).map(|(v, _)| *v).collect(),
        )
    };
    let (hi, lo) = (part(true), part(false));
    let one_sided = hi.len() < 2 || lo.len() < 2;
    let (difference, t_stat) = if one_sided {
        (None, None)
    } else {
        let dummy: Vec<f64> = high.iter().map(|h| f64::from(u8::from(*h))).collect();
        let rep = nw_regression(&r, &[("high", &dummy)], true, Lag::Auto, TRADING_DAYS)?;
        (Some(rep.coefficients[1] * TRADING_DAYS), rep.t_stats[1])
    };
    Ok(ConditionalReport {
        threshold,
        high: summarize(&hi).ok(),
        low: summarize(&lo).ok(),
        high_days: hi.len(),
        low_days: lo.len(),
        difference,
        t_stat,
        one_sided,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeekdayRow {
    #[serde(serialize_with = "weekday_name")]
    pub weekday: Weekday,
    pub observations: usize,
    pub ann_mean: f64,
    pub t_stat: Option<f64>,
}

fn weekday_name<S: serde::Serializer>(w: &Weekday, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

/// Annualized mean return per weekday, Monday to Friday.
pub fn weekday_perf(returns: &ReturnSeries) -> Vec<WeekdayRow> {
    let mut groups: [Vec<f64>; 5] = Default::default();
    for (d, v) in returns.iter() {
        if let Some(i) = weekday_index(weekday_of(d)) {
            groups[i].push(v);
        }
    }
    let days = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri];
    days.iter()
        .zip(groups.iter())
        .map(|(w, g)| WeekdayRow {
            weekday: *w,
            observations: g.len(),
            ann_mean: if g.is_empty() { 0.0 } else { super::mean(g) * TRADING_DAYS },
            t_stat: nw_regression(g, &[], true, Lag::Auto, TRADING_DAYS).ok().and_then(|r| r.t_stats[0]),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::business_days;
    use chrono::NaiveDate;

    fn series(values: Vec<f64>) -> ReturnSeries {
        // 2010-01-04 is a Monday
        ReturnSeries::new(business_days(NaiveDate::from_ymd_opt(2010, 1, 4).unwrap(), values.len()), values)
    }

    #[test]
    fn constant_indicator_is_one_sided() {
        let r = series((0..30).map(|i| (i % 4) as f64 * 0.001).collect());
        let rep = conditional_perf(&r, &series(vec![1.0; 30])).unwrap();
        assert!(rep.one_sided);
        assert_eq!(rep.low_days, 0);
    }

    #[test]
    fn self_split() {
        let r = series((0..60).map(|i| ((i * 17 % 11) as f64 - 5.0) * 0.001).collect());
        let rep = conditional_perf(&r, &r).unwrap();
        assert!(rep.high.unwrap().ann_mean_arithmetic > rep.low.unwrap().ann_mean_arithmetic);
        assert!(rep.difference.unwrap() > 0.0);
    }

    #[test]
    fn weekday_rows() {
        let same = weekday_perf(&series(vec![0.001; 50]));
        assert!(same.iter().all(|r| (r.ann_mean - 0.252).abs() < 1e-12 && r.observations == 10));
        let monday = weekday_perf(&series((0..50).map(|i| if i % 5 == 0 { 0.002 } else { 0.0 }).collect()));
        assert!(monday[0].ann_mean > 0.0);
        assert!(monday[1..].iter().all(|r| r.ann_mean == 0.0));
    }
}
