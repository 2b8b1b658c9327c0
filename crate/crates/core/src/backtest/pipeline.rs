use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::{evaluate, BacktestError, BacktestResult, CostModel};
use crate::marketdata::{global_calendar, ContractChain, CotSeries, Sector, SnapshotPanel};
use crate::nscurve::{fit_snapshots, ComponentSet, FitPanel, SeasonalSelection};
use crate::portfolio::{build_book, Family, StrategySpec, WeightBook};
use crate::signals::{
    characteristic, delta_beta, pca_slope, roll_yield, slope_diff, smooth, Beta, CharacteristicParams, SignalPanel,
};

#[derive(Debug, Clone, Default)]
pub struct Market {
    pub chains: Vec<ContractChain>,
    pub cot: BTreeMap<String, CotSeries>,
}

/// Universe and date masks applied before anything is computed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UniverseFilter {
    pub sectors: Option<Vec<Sector>>,
    pub commodities: Option<Vec<String>>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

/// Source of the sorting signal for the L/S/C families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalSource {
    NelsonSiegel,
    SlopeDiff,
    Pc2,
    RollYield(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalOptions {
    pub source: SignalSource,
    /// Curve depth used by the Nelson-Siegel fits.
    pub fit_depth: usize,
    pub seasonal: SeasonalSelection,
    /// Trailing moving-average window; 1 means no smoothing.
    pub smoothing: usize,
    pub pca_window: usize,
    pub characteristics: CharacteristicParams,
}

impl Default for SignalOptions {
    fn default() -> Self {
        Self {
            source: SignalSource::NelsonSiegel,
            fit_depth: 4,
            seasonal: SeasonalSelection::None,
            smoothing: 1,
            pca_window: 5,
            characteristics: CharacteristicParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub filter: UniverseFilter,
    pub signal: SignalOptions,
}

/// Filtered chains and calendar shared by every strategy of a run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub chains: Vec<ContractChain>,
    pub cot: BTreeMap<String, CotSeries>,
    pub calendar: Vec<NaiveDate>,
}

impl Pipeline {
    pub fn new(market: &Market, filter: &UniverseFilter) -> Result<Self, BacktestError> {
        let chains: Vec<ContractChain> = market
            .chains
            .iter()
            .filter(|c| filter.sectors.as_ref().is_none_or(|s| s.contains(&c.sector)))
            .filter(|c| filter.commodities.as_ref().is_none_or(|ids| ids.contains(&c.commodity_id)))
            .cloned()
            .collect();
        if chains.is_empty() {
            return Err(BacktestError::EmptyUniverse);
        }
        let calendar = global_calendar(&chains, filter.from, filter.to);
        if calendar.len() < 2 {
            return Err(BacktestError::EmptyRange);
        }
        let ids: BTreeSet<&str> = chains.iter().map(|c| c.commodity_id.as_str()).collect();
        let cot = market.cot.iter().filter(|(k, _)| ids.contains(k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        Ok(Self { chains, cot, calendar })
    }

    pub fn snapshots(&self, depth: usize) -> Result<SnapshotPanel, BacktestError> {
        Ok(SnapshotPanel::build(&self.chains, &self.calendar, depth)?)
    }

    pub fn fits(&self, depth: usize, seasonal: &SeasonalSelection) -> Result<FitPanel, BacktestError> {
        Ok(fit_snapshots(&self.snapshots(depth)?, ComponentSet::full(), seasonal))
    }

    /// Sorting signal for `spec`; `None` for the naive benchmarks. `fits`
    /// is reused when supplied and computed otherwise.
    pub fn signal(&self, spec: &StrategySpec, options: &SignalOptions, fits: Option<&FitPanel>) -> Result<Option<SignalPanel>, BacktestError> {
        let beta = match spec.family {
            Family::Naive(_) => return Ok(None),
            Family::Factor(kind) => {
                return Ok(Some(characteristic(kind, &self.chains, &self.calendar, &self.cot, options.characteristics)?))
            }
            Family::Level => Beta::Level,
            Family::Slope => Beta::Slope,
            Family::Curvature => Beta::Curvature,
        };
        let raw = match options.source {
            SignalSource::NelsonSiegel => match fits {
                Some(f) => delta_beta(f, beta),
                None => delta_beta(&self.fits(options.fit_depth, &options.seasonal)?, beta),
            },
            SignalSource::SlopeDiff => slope_diff(&self.snapshots(4)?),
            SignalSource::Pc2 => pca_slope(&self.snapshots(4)?, options.pca_window),
            SignalSource::RollYield(k) => roll_yield(&self.snapshots(k)?, k),
        };
        Ok(Some(if options.smoothing > 1 { smooth(&raw, options.smoothing) } else { raw }))
    }

    /// Commodities with a complete curve at `depth` on each date.
    pub fn universe(&self, depth: usize) -> Result<BTreeMap<NaiveDate, Vec<String>>, BacktestError> {
        let snaps = self.snapshots(depth)?;
        let mut out: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
        for (id, m) in &snaps.snapshots {
            for d in m.keys() {
                out.entry(*d).or_default().push(id.clone());
            }
        }
        Ok(out)
    }

    pub fn book(&self, spec: &StrategySpec, signal: Option<&SignalPanel>) -> Result<WeightBook, BacktestError> {
        let universe = match spec.family {
            Family::Naive(_) => self.universe(4)?,
            _ => BTreeMap::new(),
        };
        Ok(build_book(spec, signal, &universe))
    }

    pub fn evaluate(&self, spec: &StrategySpec, book: &WeightBook, costs: &CostModel) -> Result<BacktestResult, BacktestError> {
        evaluate(book, &self.chains, &self.calendar, costs, spec.geometry.is_spread())
    }
}

/// Signals, book and evaluation for one strategy.
pub fn run(spec: &StrategySpec, market: &Market, costs: &CostModel, options: &RunOptions) -> Result<BacktestResult, BacktestError> {
    spec.validate().map_err(BacktestError::Config)?;
    let pipeline = Pipeline::new(market, &options.filter)?;
    let signal = pipeline.signal(spec, &options.signal, None)?;
    let book = pipeline.book(spec, signal.as_ref())?;
    pipeline.evaluate(spec, &book, costs)
}
