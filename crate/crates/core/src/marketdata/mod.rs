//! Futures chains, the roll rule, excess returns and synthetic markets.

mod load;
mod oi;
mod panel;
mod roll;
mod simulate;
pub mod universe;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use load::{load_chain, load_chains_dir, load_cot, write_chain_csv, write_cot_csv};
pub use oi::{open_interest_profile, OiProfile};
pub use panel::{global_calendar, Gap, SnapshotPanel};
pub use roll::{
    location_series, roll_schedule, snapshot, snapshot_from_schedule, LocationSeries, RollDay,
    RollSchedule, SnapshotUnavailable,
};
pub use simulate::{
    simulate_market, FactorDynamics, SimCommodity, SimConfig, SimulatedMarket, TruthRow,
};

/// Mean calendar-month length used to express maturities in months.
pub const DAYS_PER_MONTH: f64 = 30.4375;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{path}:{line}: duplicate row for contract {contract} on {date}")]
    Duplicate { path: String, line: u64, contract: String, date: NaiveDate },
    #[error("unknown commodity '{0}' (not present in the commodity spec)")]
    UnknownCommodity(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("chain '{0}' has no contracts")]
    EmptyChain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    Energy,
    Grains,
    Industrials,
    Meats,
    Metals,
    Oilseeds,
    Softs,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Sector {
    type Err = MarketDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "energy" => Sector::Energy,
            "grains" => Sector::Grains,
            "industrials" => Sector::Industrials,
            "meats" => Sector::Meats,
            "metals" => Sector::Metals,
            "oilseeds" => Sector::Oilseeds,
            "softs" => Sector::Softs,
            _ => return Err(MarketDataError::Config(format!("unknown sector '{s}'"))),
        })
    }
}

/// Contract specification for one commodity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommoditySpec {
    pub sector: Sector,
    pub multiplier: f64,
    pub tick_size: f64,
}

/// Commodity spec file: a table keyed by commodity id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpecTable(pub BTreeMap<String, CommoditySpec>);

impl SpecTable {
    pub fn get(&self, id: &str) -> Option<&CommoditySpec> {
        self.0.get(id)
    }

    pub fn load(path: impl Into<PathBuf>) -> Result<Self, MarketDataError> {
        let path = path.into();
        let text = std::fs::read_to_string(&path)
            .map_err(|source| MarketDataError::Io { path: path.clone(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, MarketDataError> {
        let table: SpecTable =
            toml::from_str(text).map_err(|e| MarketDataError::Config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec table serializes")
    }

    fn validate(&self) -> Result<(), MarketDataError> {
        for (id, spec) in &self.0 {
            if !(spec.multiplier > 0.0) || !(spec.tick_size > 0.0) {
                return Err(MarketDataError::Config(format!(
                    "commodity '{id}': multiplier and tick_size must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// One settlement row of a futures contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub settle: f64,
    pub volume: f64,
    pub open_interest: f64,
}

/// Daily history of one listed contract.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractSeries {
    pub commodity_id: String,
    pub contract_code: String,
    pub expiry: NaiveDate,
    /// Strictly increasing in date, all on or before `expiry`.
    pub rows: Vec<Bar>,
}

impl ContractSeries {
    pub fn bar(&self, date: NaiveDate) -> Option<&Bar> {
        self.rows
            .binary_search_by_key(&date, |b| b.date)
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn settle(&self, date: NaiveDate) -> Option<f64> {
        self.bar(date).map(|b| b.settle)
    }

    /// Last settle on or before `date`.
    pub fn last_settle_on_or_before(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.rows.partition_point(|b| b.date <= date);
        idx.checked_sub(1).map(|i| self.rows[i].settle)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.first().map(|b| b.date)
    }
}

/// All contracts of one commodity, ordered by expiry.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractChain {
    pub commodity_id: String,
    pub sector: Sector,
    pub multiplier: f64,
    pub tick_size: f64,
    pub contracts: Vec<ContractSeries>,
}

impl ContractChain {
    /// Union of all trading dates in the chain, sorted.
    pub fn calendar(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self
            .contracts
            .iter()
            .flat_map(|c| c.rows.iter().map(|b| b.date))
            .collect();
        dates.sort_unstable();
        dates.dedup();
        dates
    }

    pub fn spec(&self) -> CommoditySpec {
        CommoditySpec { sector: self.sector, multiplier: self.multiplier, tick_size: self.tick_size }
    }

    pub fn contract(&self, code: &str) -> Option<&ContractSeries> {
        self.contracts.iter().find(|c| c.contract_code == code)
    }
}

/// One priced location of a curve snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    /// 1-based location on the curve.
    pub location: usize,
    pub contract_code: String,
    pub maturity_days: i64,
    pub maturity_months: f64,
    pub price: f64,
}

/// The first `K` locations of one commodity's curve on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSnapshot {
    pub date: NaiveDate,
    pub commodity_id: String,
    pub points: Vec<CurvePoint>,
}

impl CurveSnapshot {
    pub fn maturities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.maturity_months).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    pub fn depth(&self) -> usize {
        self.points.len()
    }

    /// Price at 1-based location `k`.
    pub fn price(&self, k: usize) -> Option<f64> {
        self.points.get(k.checked_sub(1)?).map(|p| p.price)
    }

    /// Builds a snapshot from raw maturities (in months) and prices; used by
    /// tests and by callers that already hold curve data.
    pub fn from_curve(
        date: NaiveDate,
        commodity_id: impl Into<String>,
        maturities_months: &[f64],
        prices: &[f64],
    ) -> Self {
        let points = maturities_months
            .iter()
            .zip(prices)
            .enumerate()
            .map(|(i, (m, p))| CurvePoint {
                location: i + 1,
                contract_code: format!("L{}", i + 1),
                maturity_days: (m * DAYS_PER_MONTH).round() as i64,
                maturity_months: *m,
                price: *p,
            })
            .collect();
        Self { date, commodity_id: commodity_id.into(), points }
    }
}

/// Weekly commercial-trader positions for one commodity.
#[derive(Debug, Clone, PartialEq)]
pub struct CotSeries {
    pub commodity_id: String,
    pub rows: Vec<CotRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotRow {
    pub date: NaiveDate,
    pub commercial_short: f64,
    pub commercial_long: f64,
}

/// One-period excess return `F_t / F_{t-1} - 1`.
pub fn excess_return(price: f64, previous: f64) -> Result<f64, MarketDataError> {
    if !(price > 0.0) || !(previous > 0.0) {
        return Err(MarketDataError::Domain(format!(
            "excess return needs positive prices, got {price} and {previous}"
        )));
    }
    Ok(price / previous - 1.0)
}
