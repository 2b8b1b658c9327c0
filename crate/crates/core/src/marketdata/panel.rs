use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;

use super::{roll_schedule, snapshot_from_schedule, ContractChain, CurveSnapshot, MarketDataError};

/// Union of trading dates across chains, optionally clipped to `[from, to]`.
pub fn global_calendar(chains: &[ContractChain], from: Option<NaiveDate>, to: Option<NaiveDate>) -> Vec<NaiveDate> {
    let mut dates: Vec<NaiveDate> = chains.iter().flat_map(|c| c.calendar()).collect();
    dates.sort_unstable();
    dates.dedup();
    dates.retain(|d| from.is_none_or(|f| *d >= f) && to.is_none_or(|t| *d <= t));
    dates
}

/// A commodity-day on which no snapshot or fit could be produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub commodity_id: String,
    pub date: NaiveDate,
    pub reason: String,
}

/// Curve snapshots at a fixed depth for every commodity over a shared calendar.
/// Unavailable commodity-days are absent from `snapshots` and listed in `gaps`.
#[derive(Debug, Clone, Default)]
pub struct SnapshotPanel {
    pub calendar: Vec<NaiveDate>,
    pub depth: usize,
    pub snapshots: BTreeMap<String, BTreeMap<NaiveDate, CurveSnapshot>>,
    pub gaps: Vec<Gap>,
}

impl SnapshotPanel {
    pub fn build(chains: &[ContractChain], calendar: &[NaiveDate], depth: usize) -> Result<Self, MarketDataError> {
        let per: Vec<Result<(String, BTreeMap<NaiveDate, CurveSnapshot>, Vec<Gap>), MarketDataError>> = chains
            .par_iter()
            .map(|chain| {
                let schedule = roll_schedule(chain, depth)?;
                let mut snaps = BTreeMap::new();
                let mut gaps = Vec::new();
                for &date in calendar {
                    match snapshot_from_schedule(chain, &schedule, date) {
                        Ok(s) => {
                            snaps.insert(date, s);
                        }
                        Err(e) => gaps.push(Gap { commodity_id: chain.commodity_id.clone(), date, reason: e.to_string() }),
                    }
                }
                Ok((chain.commodity_id.clone(), snaps, gaps))
            })
            .collect();
        let mut panel = SnapshotPanel { calendar: calendar.to_vec(), depth, ..Default::default() };
        for item in per {
            let (id, snaps, gaps) = item?;
            panel.snapshots.insert(id, snaps);
            panel.gaps.extend(gaps);
        }
        panel.gaps.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.commodity_id.cmp(&b.commodity_id)));
        Ok(panel)
    }

    pub fn get(&self, commodity: &str, date: NaiveDate) -> Option<&CurveSnapshot> {
        self.snapshots.get(commodity).and_then(|m| m.get(&date))
    }

    pub fn commodities(&self) -> impl Iterator<Item = &str> {
        self.snapshots.keys().map(String::as_str)
    }
}
