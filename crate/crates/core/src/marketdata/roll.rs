//! Roll rule: the front contract is held until the last trading day before it
//! enters its expiry month; locations 2..K are the next contracts by expiry.

use chrono::NaiveDate;

use super::{ContractChain, CurvePoint, CurveSnapshot, MarketDataError, DAYS_PER_MONTH};
use crate::calendar::month_key;

/// Location-to-contract mapping on one trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct RollDay {
    pub date: NaiveDate,
    /// Indices into `chain.contracts` for locations `1..=K`, or `None` when
    /// fewer than `K` contracts are live (day excluded downstream).
    pub locations: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollSchedule {
    pub commodity_id: String,
    pub depth: usize,
    pub days: Vec<RollDay>,
}

/// Why a snapshot could not be formed for a commodity-day.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnapshotUnavailable {
    #[error("{0} is not a trading day of the chain")]
    NotTradingDay(NaiveDate),
    #[error("fewer than {depth} live contracts on {date}")]
    Incomplete { date: NaiveDate, depth: usize },
    #[error("missing price at location {location} on {date}")]
    MissingPrice { date: NaiveDate, location: usize },
}

impl RollSchedule {
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search_by_key(&date, |d| d.date).ok()
    }

    pub fn locations(&self, date: NaiveDate) -> Option<&[usize]> {
        self.index_of(date).and_then(|i| self.days[i].locations.as_deref())
    }

    /// Contract index at 1-based location `k` on `date`.
    pub fn contract_at(&self, date: NaiveDate, k: usize) -> Option<usize> {
        self.locations(date).and_then(|l| l.get(k.checked_sub(1)?).copied())
    }

    /// True when the mapping on day `i` differs from day `i - 1`.
    pub fn is_roll_day(&self, i: usize) -> bool {
        i > 0 && self.days[i].locations != self.days[i - 1].locations
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }
}

/// Last calendar date strictly before the contract's expiry month; the front
/// contract is rolled at the close of this day. `None` when the calendar has no
/// such day (never eligible); `NaiveDate::MAX` when the calendar ends before
/// the expiry month is reached (cutoff lies beyond the data).
pub(crate) fn roll_cutoff(calendar: &[NaiveDate], expiry: NaiveDate) -> Option<NaiveDate> {
    let key = month_key(expiry);
    let idx = calendar.partition_point(|d| month_key(*d) < key);
    if idx == calendar.len() {
        return (idx > 0).then_some(NaiveDate::MAX);
    }
    idx.checked_sub(1).map(|i| calendar[i])
}

/// Per-day mapping from locations `1..=depth` to contracts.
pub fn roll_schedule(chain: &ContractChain, depth: usize) -> Result<RollSchedule, MarketDataError> {
    if chain.contracts.is_empty() {
        return Err(MarketDataError::EmptyChain(chain.commodity_id.clone()));
    }
    if depth == 0 {
        return Err(MarketDataError::Config("roll schedule depth must be at least 1".into()));
    }
    let calendar = chain.calendar();
    let cutoffs: Vec<Option<NaiveDate>> =
        chain.contracts.iter().map(|c| roll_cutoff(&calendar, c.expiry)).collect();
    let listed: Vec<Option<NaiveDate>> = chain.contracts.iter().map(|c| c.first_date()).collect();

    let mut days = Vec::with_capacity(calendar.len());
    let mut lo = 0usize;
    for &date in &calendar {
        // cutoffs are non-decreasing in expiry, so the first eligible index only moves forward
        while lo < cutoffs.len() && !cutoffs[lo].is_some_and(|c| date < c) {
            lo += 1;
        }
        let mut picked = Vec::with_capacity(depth);
        for i in lo..chain.contracts.len() {
            if picked.len() == depth {
                break;
            }
            let eligible = cutoffs[i].is_some_and(|c| date < c) && listed[i].is_some_and(|f| f <= date);
            if eligible {
                picked.push(i);
            }
        }
        let locations = (picked.len() == depth).then_some(picked);
        days.push(RollDay { date, locations });
    }
    Ok(RollSchedule { commodity_id: chain.commodity_id.clone(), depth, days })
}

/// Curve snapshot using a precomputed schedule.
pub fn snapshot_from_schedule(
    chain: &ContractChain,
    schedule: &RollSchedule,
    date: NaiveDate,
) -> Result<CurveSnapshot, SnapshotUnavailable> {
    let idx = schedule.index_of(date).ok_or(SnapshotUnavailable::NotTradingDay(date))?;
    let locations = schedule.days[idx]
        .locations
        .as_ref()
        .ok_or(SnapshotUnavailable::Incomplete { date, depth: schedule.depth })?;
    let mut points = Vec::with_capacity(locations.len());
    for (k, &ci) in locations.iter().enumerate() {
        let contract = &chain.contracts[ci];
        let price = contract
            .settle(date)
            .ok_or(SnapshotUnavailable::MissingPrice { date, location: k + 1 })?;
        let maturity_days = (contract.expiry - date).num_days();
        points.push(CurvePoint {
            location: k + 1,
            contract_code: contract.contract_code.clone(),
            maturity_days,
            maturity_months: maturity_days as f64 / DAYS_PER_MONTH,
            price,
        });
    }
    Ok(CurveSnapshot { date, commodity_id: chain.commodity_id.clone(), points })
}

/// Curve snapshot of the first `depth` locations on `date`.
pub fn snapshot(chain: &ContractChain, date: NaiveDate, depth: usize) -> Result<CurveSnapshot, MarketDataError> {
    let schedule = roll_schedule(chain, depth)?;
    snapshot_from_schedule(chain, &schedule, date).map_err(|e| MarketDataError::Domain(e.to_string()))
}

/// Continuous return series for one curve location: the value on day `t` is
/// the excess return from `t-1` to `t` of the contract that occupied the
/// location at the close of `t-1`, so returns never straddle a roll.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationSeries {
    pub commodity_id: String,
    pub location: usize,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<Option<f64>>,
    /// `volume × settle × multiplier` of the same contract on day `t`.
    pub dollar_volume: Vec<Option<f64>>,
}

pub fn location_series(chain: &ContractChain, schedule: &RollSchedule, location: usize) -> LocationSeries {
    let mut dates = Vec::new();
    let mut returns = Vec::new();
    let mut dollar_volume = Vec::new();
    for w in schedule.days.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        dates.push(cur.date);
        let contract = prev
            .locations
            .as_ref()
            .and_then(|l| l.get(location.wrapping_sub(1)))
            .map(|&ci| &chain.contracts[ci]);
        let (r, dv) = match contract {
            Some(c) => match (c.bar(cur.date), c.settle(prev.date)) {
                (Some(bar), Some(p0)) => (
                    super::excess_return(bar.settle, p0).ok(),
                    Some(bar.volume * bar.settle * chain.multiplier),
                ),
                _ => (None, None),
            },
            None => (None, None),
        };
        returns.push(r);
        dollar_volume.push(dv);
    }
    LocationSeries { commodity_id: chain.commodity_id.clone(), location, dates, returns, dollar_volume }
}
