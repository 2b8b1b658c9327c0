//! Dated return series.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::{month_key, MonthKey};

/// Dated one-period excess returns, strictly increasing in date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    /// Builds a series, dropping nothing. Panics if dates are not strictly increasing
    /// or the lengths differ; callers construct series from ordered calendars.
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Self {
        assert_eq!(dates.len(), values.len(), "dates and values must align");
        assert!(
            dates.windows(2).all(|w| w[0] < w[1]),
            "return series dates must be strictly increasing"
        );
        Self { dates, values }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (NaiveDate, f64)>) -> Self {
        let (dates, values) = pairs.into_iter().unzip();
        Self::new(dates, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }

    pub fn as_map(&self) -> BTreeMap<NaiveDate, f64> {
        self.iter().collect()
    }

    /// Sub-series with `from <= date <= to` (either bound optional).
    pub fn slice(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        Self::from_pairs(self.iter().filter(|(d, _)| {
            from.is_none_or(|f| *d >= f) && to.is_none_or(|t| *d <= t)
        }))
    }

    /// Calendar-month compounded returns, keyed by month.
    pub fn monthly(&self) -> Vec<(MonthKey, f64)> {
        let mut out: Vec<(MonthKey, f64)> = Vec::new();
        for (d, r) in self.iter() {
            let key = month_key(d);
            match out.last_mut() {
                Some((k, growth)) if *k == key => *growth *= 1.0 + r,
                _ => out.push((key, 1.0 + r)),
            }
        }
        out.into_iter().map(|(k, g)| (k, g - 1.0)).collect()
    }

    /// Monthly compounded series dated at the last observation of each month.
    pub fn to_monthly_series(&self) -> Self {
        let mut pairs: Vec<(NaiveDate, f64)> = Vec::new();
        let mut growth = 1.0;
        for (i, (d, r)) in self.iter().enumerate() {
            growth *= 1.0 + r;
            let last = self
                .dates
                .get(i + 1)
                .is_none_or(|next| month_key(*next) != month_key(d));
            if last {
                pairs.push((d, growth - 1.0));
                growth = 1.0;
            }
        }
        Self::from_pairs(pairs)
    }

    /// Inner join with another series on dates.
    pub fn align(&self, other: &Self) -> (Vec<NaiveDate>, Vec<f64>, Vec<f64>) {
        let other = other.as_map();
        let mut dates = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (d, x) in self.iter() {
            if let Some(y) = other.get(&d) {
                dates.push(d);
                a.push(x);
                b.push(*y);
            }
        }
        (dates, a, b)
    }
}
