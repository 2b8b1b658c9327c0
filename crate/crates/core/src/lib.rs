//! Nelson-Siegel term-structure signals and long-short spread backtests for
//! commodity futures.
//!
//! The crate is organised as a pipeline:
//!
//! - [`marketdata`]: contract chains, roll schedule, excess returns, synthetic markets.
//! - [`nscurve`]: daily Nelson-Siegel fits (full, restricted, seasonal).
//! - [`signals`]: Δβ signals, alternative slope signals, characteristics.
//! - [`portfolio`]: weight books, timing overlay, blends.
//! - [`backtest`]: gross returns, turnover and net returns under three cost scenarios.
//! - [`perfstats`]: summary statistics, Newey-West regressions, conditional splits.

pub mod backtest;
pub mod calendar;
pub mod linalg;
pub mod marketdata;
pub mod nscurve;
pub mod perfstats;
pub mod portfolio;
pub mod series;
pub mod signals;

pub use backtest::{BacktestResult, CostModel, CostScenario};
pub use marketdata::{CommoditySpec, ContractChain, CurveSnapshot, Sector, SpecTable};
pub use nscurve::{ComponentSet, NsFit, SeasonalNsFit};
pub use perfstats::{PerfSummary, RegressionReport};
pub use portfolio::{StrategySpec, WeightBook};
pub use series::ReturnSeries;
pub use signals::{SignalKind, SignalPanel};

