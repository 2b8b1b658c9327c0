//! Commodity characteristics used to sort the benchmark factor portfolios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;

use super::{SignalKind, SignalPanel};
use crate::calendar::{add_months, month_ends, month_key, MonthKey};
use crate::marketdata::{
    location_series, roll_schedule, snapshot_from_schedule, ContractChain, CotSeries, LocationSeries, MarketDataError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Characteristic {
    Momentum,
    Carry,
    HedgingPressure,
    Skewness,
    BasisMomentum,
    RelativeBasis,
    Liquidity,
    /// Twelve-month momentum of the m-th contract.
    CurveMomentum(usize),
}

impl Characteristic {
    pub const ALL_DEFAULT: [Characteristic; 8] = [
        Characteristic::Momentum,
        Characteristic::Carry,
        Characteristic::HedgingPressure,
        Characteristic::Skewness,
        Characteristic::BasisMomentum,
        Characteristic::RelativeBasis,
        Characteristic::Liquidity,
        Characteristic::CurveMomentum(2),
    ];

    /// Whether high values form the long leg of the factor portfolio.
    pub fn high_is_long(self) -> bool {
        !matches!(self, Characteristic::Skewness | Characteristic::Liquidity)
    }

    fn depth(self) -> usize {
        match self {
            Characteristic::Momentum | Characteristic::Skewness | Characteristic::Liquidity | Characteristic::HedgingPressure => 1,
            Characteristic::Carry | Characteristic::BasisMomentum => 2,
            Characteristic::RelativeBasis => 3,
            Characteristic::CurveMomentum(m) => m.max(1),
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Characteristic::Momentum => write!(f, "mom"),
            Characteristic::Carry => write!(f, "carry"),
            Characteristic::HedgingPressure => write!(f, "hp"),
            Characteristic::Skewness => write!(f, "skew"),
            Characteristic::BasisMomentum => write!(f, "bmom"),
            Characteristic::RelativeBasis => write!(f, "rb"),
            Characteristic::Liquidity => write!(f, "liq"),
            Characteristic::CurveMomentum(m) => write!(f, "curvem{m}"),
        }
    }
}

impl FromStr for Characteristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "mom" => Characteristic::Momentum,
            "carry" => Characteristic::Carry,
            "hp" => Characteristic::HedgingPressure,
            "skew" => Characteristic::Skewness,
            "bmom" => Characteristic::BasisMomentum,
            "rb" => Characteristic::RelativeBasis,
            "liq" => Characteristic::Liquidity,
            "curvem" => Characteristic::CurveMomentum(2),
            _ => match s.strip_prefix("curvem").and_then(|m| m.parse().ok()) {
                Some(m) if m >= 1 => Characteristic::CurveMomentum(m),
                _ => return Err(format!("unknown signal kind '{s}'")),
            },
        })
    }
}

/// Window lengths in trading days (`skew_days`, `liq_days`), months and weeks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicParams {
    pub skew_days: usize,
    pub liq_days: usize,
    pub momentum_months: usize,
    pub hp_weeks: usize,
}

impl Default for CharacteristicParams {
    fn default() -> Self {
        Self { skew_days: 252, liq_days: 42, momentum_months: 12, hp_weeks: 52 }
    }
}

/// Evaluates one characteristic for every chain on the dates of `calendar`.
/// Momentum-type values are only formed on month-end dates.
pub fn characteristic(
    kind: Characteristic,
    chains: &[ContractChain],
    calendar: &[NaiveDate],
    cot: &BTreeMap<String, CotSeries>,
    params: CharacteristicParams,
) -> Result<SignalPanel, MarketDataError> {
    let dates: BTreeSet<NaiveDate> = calendar.iter().copied().collect();
    let ends: BTreeSet<NaiveDate> = month_ends(calendar).into_iter().collect();
    let per: Vec<Result<(String, BTreeMap<NaiveDate, f64>), MarketDataError>> = chains
        .par_iter()
        .map(|chain| {
            let values = match kind {
                Characteristic::HedgingPressure => match cot.get(&chain.commodity_id) {
                    Some(c) => hedging_pressure(c, calendar, params.hp_weeks),
                    None => BTreeMap::new(),
                },
                _ => chain_values(kind, chain, &ends, params)?,
            };
            Ok((chain.commodity_id.clone(), values.into_iter().filter(|(d, _)| dates.contains(d)).collect()))
        })
        .collect();
    let mut panel = SignalPanel::new(SignalKind::Factor(kind), calendar.to_vec());
    for item in per {
        let (id, v) = item?;
        panel.values.insert(id, v);
    }
    Ok(panel)
}

fn chain_values(
    kind: Characteristic,
    chain: &ContractChain,
    month_ends: &BTreeSet<NaiveDate>,
    params: CharacteristicParams,
) -> Result<BTreeMap<NaiveDate, f64>, MarketDataError> {
    let schedule = roll_schedule(chain, kind.depth())?;
    let loc = |k: usize| location_series(chain, &schedule, k);
    let n = params.momentum_months;
    Ok(match kind {
        Characteristic::Momentum => momentum(&loc(1), month_ends, n),
        Characteristic::CurveMomentum(m) => momentum(&loc(m), month_ends, n),
        Characteristic::BasisMomentum => {
            let second = momentum(&loc(2), month_ends, n);
            momentum(&loc(1), month_ends, n)
                .into_iter()
                .filter_map(|(d, a)| Some((d, a - second.get(&d)?)))
                .collect()
        }
        Characteristic::Skewness => skewness(&loc(1), params.skew_days),
        Characteristic::Liquidity => liquidity(&loc(1), params.liq_days),
        Characteristic::Carry | Characteristic::RelativeBasis => schedule
            .days
            .iter()
            .filter_map(|day| {
                let s = snapshot_from_schedule(chain, &schedule, day.date).ok()?;
                let p = s.prices();
                let value = if kind == Characteristic::Carry {
                    p[0] / p[1] - 1.0
                } else {
                    let t: Vec<f64> = s.points.iter().map(|c| c.maturity_days as f64).collect();
                    if t[1] == t[0] || t[2] == t[1] {
                        return None;
                    }
                    (p[0] / p[1]).ln() / (t[1] - t[0]) - (p[1] / p[2]).ln() / (t[2] - t[1])
                };
                Some((day.date, value))
            })
            .collect(),
        Characteristic::HedgingPressure => unreachable!("handled by the caller"),
    })
}

/// Calendar-month compounded returns with the month's last date; a month with
/// any missing daily return is `None`.
fn monthly_returns(series: &LocationSeries) -> Vec<(MonthKey, NaiveDate, Option<f64>)> {
    let mut out: Vec<(MonthKey, NaiveDate, Option<f64>)> = Vec::new();
    for (d, r) in series.dates.iter().zip(&series.returns) {
        let key = month_key(*d);
        match out.last_mut() {
            Some(last) if last.0 == key => {
                last.1 = *d;
                last.2 = last.2.zip(*r).map(|(acc, r)| (1.0 + acc) * (1.0 + r) - 1.0);
            }
            _ => out.push((key, *d, *r)),
        }
    }
    out
}

/// `Π(1 + r_m) − 1` over the trailing `n` months, dated at month ends.
fn momentum(series: &LocationSeries, month_ends: &BTreeSet<NaiveDate>, n: usize) -> BTreeMap<NaiveDate, f64> {
    let months = monthly_returns(series);
    let mut out = BTreeMap::new();
    if n == 0 || months.len() < n {
        return out;
    }
    for w in months.windows(n) {
        let (last_key, last_date, _) = w[n - 1];
        if !month_ends.contains(&last_date) || add_months(w[0].0, n as i32 - 1) != last_key {
            continue;
        }
        let Some(growth) = w.iter().try_fold(1.0, |acc, m| m.2.map(|r| acc * (1.0 + r))) else { continue };
        out.insert(last_date, growth - 1.0);
    }
    out
}

fn complete(window: &[Option<f64>]) -> Option<Vec<f64>> {
    window.iter().copied().collect()
}

/// Population skewness of the trailing `days` daily returns.
fn skewness(series: &LocationSeries, days: usize) -> BTreeMap<NaiveDate, f64> {
    let mut out = BTreeMap::new();
    if days < 2 {
        return out;
    }
    for (i, w) in series.returns.windows(days).enumerate() {
        let Some(r) = complete(w) else { continue };
        let n = r.len() as f64;
        let mu = r.iter().sum::<f64>() / n;
        let var = r.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            continue;
        }
        let m3 = r.iter().map(|x| (x - mu).powi(3)).sum::<f64>() / n;
        out.insert(series.dates[i + days - 1], m3 / var.powf(1.5));
    }
    out
}

/// Mean of `$Vol / |r|` over the trailing `days`, skipping zero-return days.
fn liquidity(series: &LocationSeries, days: usize) -> BTreeMap<NaiveDate, f64> {
    let mut out = BTreeMap::new();
    if days == 0 {
        return out;
    }
    for i in days - 1..series.dates.len() {
        let range = i + 1 - days..=i;
        let (Some(r), Some(v)) = (complete(&series.returns[range.clone()]), complete(&series.dollar_volume[range])) else {
            continue;
        };
        let ratios: Vec<f64> = r.iter().zip(&v).filter(|(r, _)| **r != 0.0).map(|(r, v)| v / r.abs()).collect();
        if !ratios.is_empty() {
            out.insert(series.dates[i], ratios.iter().sum::<f64>() / ratios.len() as f64);
        }
    }
    out
}

/// Mean of `(S − L)/(S + L)` over the latest `weeks` reports on or before each date.
fn hedging_pressure(cot: &CotSeries, calendar: &[NaiveDate], weeks: usize) -> BTreeMap<NaiveDate, f64> {
    let mut rows = cot.rows.clone();
    rows.sort_by_key(|r| r.date);
    let mut out = BTreeMap::new();
    if weeks == 0 {
        return out;
    }
    for &date in calendar {
        let n = rows.partition_point(|r| r.date <= date);
        if n < weeks {
            continue;
        }
        let mut sum = 0.0;
        let mut ok = true;
        for r in &rows[n - weeks..n] {
            let total = r.commercial_short + r.commercial_long;
            if total == 0.0 {
                ok = false;
                break;
            }
            sum += (r.commercial_short - r.commercial_long) / total;
        }
        if ok {
            out.insert(date, sum / weeks as f64);
        }
    }
    out
}
