//! Gross returns, turnover and net returns of weight books.

mod engine;
mod pipeline;

use std::fmt;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;

pub use engine::evaluate;
pub use pipeline::{run, Market, Pipeline, RunOptions, SignalOptions, SignalSource, UniverseFilter};

use crate::marketdata::{CommoditySpec, MarketDataError};
use crate::series::ReturnSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CostScenario {
    /// Commission only.
    Tc1,
    /// Flat proportional rate.
    Tc2,
    /// Commission plus a fraction of a tick of market impact.
    Tc3,
}

impl CostScenario {
    pub const ALL: [CostScenario; 3] = [CostScenario::Tc1, CostScenario::Tc2, CostScenario::Tc3];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CostScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostScenario::Tc1 => "tc1",
            CostScenario::Tc2 => "tc2",
            CostScenario::Tc3 => "tc3",
        })
    }
}

/// How held weights are carried forward to the pre-trade comparison point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftConvention {
    /// `w(1 + r)` rescaled so gross exposure is unchanged by the day's moves;
    /// keeps daily turnover within [0, 2].
    GrossPreserving,
    /// `w(1 + r)` as is.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Currency per contract.
    pub commission: f64,
    pub flat_rate: f64,
    /// Fraction of a tick paid as impact.
    pub n_ticks: f64,
    /// Spread and butterfly trades cross one ticket, halving per-leg costs.
    pub spread_ticket: bool,
    pub drift: DriftConvention,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { commission: 1.5, flat_rate: 0.000167, n_ticks: 0.25, spread_ticket: true, drift: DriftConvention::GrossPreserving }
    }
}

impl CostModel {
    /// Zero commission, rate and impact.
    pub fn free() -> Self {
        Self { commission: 0.0, flat_rate: 0.0, n_ticks: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), BacktestError> {
        if [self.commission, self.flat_rate, self.n_ticks].iter().any(|v| !(*v >= 0.0)) {
            return Err(BacktestError::Config("cost parameters must be non-negative".into()));
        }
        Ok(())
    }

    /// Cost per unit of traded notional for a contract at price `price`.
    pub fn unit_cost(&self, scenario: CostScenario, spec: &CommoditySpec, price: f64) -> f64 {
        match scenario {
            CostScenario::Tc1 => self.commission / (price * spec.multiplier),
            CostScenario::Tc2 => self.flat_rate,
            CostScenario::Tc3 => {
                (self.commission + self.n_ticks * spec.tick_size * spec.multiplier) / (price * spec.multiplier)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DayFlags {
    /// The target book had only one leg.
    pub degenerate: bool,
    /// A held location moved to a new contract.
    pub roll: bool,
    /// A held contract had no price; its return was set to zero.
    pub missing_price: bool,
    /// A target position had no contract at its location and was skipped.
    pub dropped: bool,
}

impl fmt::Display for DayFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.degenerate, "degenerate"),
            (self.roll, "roll"),
            (self.missing_price, "missing"),
            (self.dropped, "dropped"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        f.write_str(&names.join(";"))
    }
}

impl DayFlags {
    fn parse(s: &str) -> Result<Self, String> {
        let mut out = Self::default();
        for name in s.split(';').filter(|n| !n.is_empty()) {
            match name {
                "degenerate" => out.degenerate = true,
                "roll" => out.roll = true,
                "missing" => out.missing_price = true,
                "dropped" => out.dropped = true,
                other => return Err(format!("unknown flag '{other}'")),
            }
        }
        Ok(out)
    }
}

/// Row `i` holds the return from the previous calendar date to `dates[i]` and
/// the trade placed at the close of `dates[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BacktestResult {
    pub dates: Vec<NaiveDate>,
    pub gross: Vec<f64>,
    pub turnover: Vec<f64>,
    /// Indexed by [`CostScenario`] order.
    pub net: [Vec<f64>; 3],
    pub flags: Vec<DayFlags>,
}

impl BacktestResult {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn gross_series(&self) -> ReturnSeries {
        ReturnSeries::new(self.dates.clone(), self.gross.clone())
    }

    pub fn turnover_series(&self) -> ReturnSeries {
        ReturnSeries::new(self.dates.clone(), self.turnover.clone())
    }

    pub fn net_series(&self, scenario: CostScenario) -> ReturnSeries {
        ReturnSeries::new(self.dates.clone(), self.net[scenario.index()].clone())
    }

    /// Rows with `from <= date <= to`.
    pub fn slice(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| from.is_none_or(|f| self.dates[i] >= f) && to.is_none_or(|t| self.dates[i] <= t))
            .collect();
        let pick = |v: &Vec<f64>| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        Self {
            dates: keep.iter().map(|&i| self.dates[i]).collect(),
            gross: pick(&self.gross),
            turnover: pick(&self.turnover),
            net: [pick(&self.net[0]), pick(&self.net[1]), pick(&self.net[2])],
            flags: keep.iter().map(|&i| self.flags[i]).collect(),
        }
    }

    /// `date,gross,turnover,net_tc1,net_tc2,net_tc3,flags`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "date,gross,turnover,net_tc1,net_tc2,net_tc3,flags")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.dates[i], self.gross[i], self.turnover[i], self.net[0][i], self.net[1][i], self.net[2][i], self.flags[i]
            )?;
        }
        out.flush()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, MarketDataError> {
        let path = path.as_ref();
        let io = |e: std::io::Error| MarketDataError::Io { path: path.to_path_buf(), source: e };
        let text = std::fs::read_to_string(path).map_err(io)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let parse_err = |line: usize, message: String| MarketDataError::Parse { path: path.display().to_string(), line: line as u64, message };
        if header != "date,gross,turnover,net_tc1,net_tc2,net_tc3,flags" {
            return Err(parse_err(1, format!("unexpected header '{header}'")));
        }
        let mut out = Self::default();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(parse_err(lineno, format!("expected 7 fields, found {}", f.len())));
            }
            let date = f[0].parse::<NaiveDate>().map_err(|e| parse_err(lineno, e.to_string()))?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(lineno, format!("'{s}': {e}")));
            out.dates.push(date);
            out.gross.push(num(f[1])?);
            out.turnover.push(num(f[2])?);
            for k in 0..3 {
                out.net[k].push(num(f[3 + k])?);
            }
            out.flags.push(DayFlags::parse(f[6]).map_err(|e| parse_err(lineno, e))?);
        }
        if out.dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(0, "dates are not strictly increasing".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BacktestError {
    #[error("backtest: universe is empty after filtering")]
    EmptyUniverse,
    #[error("backtest: date range leaves fewer than two trading days")]
    EmptyRange,
    #[error("backtest: {0}")]
    Config(String),
    #[error("backtest: book references unknown commodity '{0}'")]
    UnknownCommodity(String),
    #[error(transparent)]
    MarketData(#[from] MarketDataError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::Sector;

    fn spec() -> CommoditySpec {
        CommoditySpec { sector: Sector::Energy, multiplier: 1000.0, tick_size: 0.01 }
    }

    #[test]
    fn unit_costs() {
        let c = CostModel::default();
        assert!((c.unit_cost(CostScenario::Tc1, &spec(), 50.0) - 0.00003).abs() < 1e-18);
        assert_eq!(c.unit_cost(CostScenario::Tc2, &spec(), 50.0), 0.000167);
        assert_eq!(c.unit_cost(CostScenario::Tc2, &spec(), 1e6), 0.000167);
        let no_impact = CostModel { n_ticks: 0.0, ..c };
        assert_eq!(
            no_impact.unit_cost(CostScenario::Tc3, &spec(), 50.0),
            no_impact.unit_cost(CostScenario::Tc1, &spec(), 50.0)
        );
        assert!(c.unit_cost(CostScenario::Tc3, &spec(), 50.0) > c.unit_cost(CostScenario::Tc1, &spec(), 50.0));
    }

    #[test]
    fn negative_costs_rejected() {
        assert!(CostModel { commission: -1.0, ..CostModel::default() }.validate().is_err());
    }

    #[test]
    fn flags_round_trip() {
        let f = DayFlags { degenerate: true, roll: false, missing_price: true, dropped: false };
        assert_eq!(DayFlags::parse(&f.to_string()).unwrap(), f);
        assert_eq!(DayFlags::parse("").unwrap(), DayFlags::default());
    }
}
