use std::path::{Path, PathBuf};

use curvespread::backtest::{Market, Pipeline, SignalSource, UniverseFilter};
use curvespread::marketdata::{
    load_chains_dir, load_cot, simulate_market, write_chain_csv, write_cot_csv, MarketDataError, SimConfig, SpecTable,
};
use curvespread::nscurve::{write_fit_panel_csv, FitPanel, SeasonalSelection};
use curvespread::portfolio::{dispersion_series, Family};
use curvespread::BacktestResult;
use rayon::prelude::*;

use crate::config::{load_sim_config, ResolvedStrategy, RunConfig, SimSpec};
use crate::error::{io_error, CliError};
use crate::report;

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Simulates a market and writes it in the on-disk layout read by `data.prices_dir`.
pub fn cmd_simulate(config: Option<&Path>, seed: u64, out: &Path) -> Result<(), CliError> {
    let sim = match config {
        Some(path) => load_sim_config(path)?,
        None => SimSpec::default().to_sim_config(),
    };
    sim.validate()?;
    let market = simulate_market(&sim, seed)?;
    let prices = out.join("prices");
    create_dir(&prices)?;
    for chain in &market.chains {
        write_chain_csv(chain, prices.join(format!("{}.csv", chain.commodity_id)))?;
    }
    write_file(&out.join("specs.toml"), &market.specs.to_toml())?;
    write_cot_csv(&market.cot, out.join("cot.csv"))?;
    let truth = out.join("truth.csv");
    market.write_truth_csv(&truth).map_err(|e| io_error(&truth, e))?;
    write_file(&out.join("sim_config.toml"), &sim.to_toml())?;
    Ok(())
}

fn simulated(sim: &SimConfig, seed: u64) -> Result<(Market, SpecTable), CliError> {
    let m = simulate_market(sim, seed)?;
    Ok((Market { chains: m.chains, cot: m.cot }, m.specs))
}

/// Loads or simulates the market described by `cfg.data`.
pub fn load_market(cfg: &RunConfig) -> Result<Market, CliError> {
    let d = &cfg.data;
    let (market, specs) = if let Some(spec) = &d.simulate {
        let sim = spec.to_sim_config();
        sim.validate()?;
        simulated(&sim, cfg.seed)?
    } else if let Some(path) = &d.sim_config {
        simulated(&load_sim_config(path)?, cfg.seed)?
    } else {
        let (Some(prices), Some(spec_file)) = (&d.prices_dir, &d.spec_file) else {
            return Err(CliError::Validation("data: no market source configured".into()));
        };
        let specs = SpecTable::load(spec_file.clone())?;
        let chains = load_chains_dir(prices, &specs)?;
        let cot = match &d.cot_file {
            Some(p) => load_cot(p)?,
            None => Default::default(),
        };
        (Market { chains, cot }, specs)
    };
    for id in cfg.universe.commodities.iter().flatten() {
        if specs.get(id).is_none() {
            return Err(CliError::Validation(MarketDataError::UnknownCommodity(id.clone()).to_string()));
        }
    }
    Ok(market)
}

/// Fits every snapshot of the configured universe and writes `fits.csv`.
pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    if cfg.fit.seasonal != SeasonalSelection::None && cfg.fit.depth <= 4 {
        return Err(CliError::Validation("the seasonal model needs a fit depth above 4".into()));
    }
    let market = load_market(cfg)?;
    let pipeline = Pipeline::new(&market, &cfg.filter()?)?;
    let fits = pipeline.fits(cfg.fit.depth, &cfg.fit.seasonal)?;
    create_dir(out)?;
    let path = out.join("fits.csv");
    write_fit_panel_csv(&fits, &path).map_err(|e| io_error(&path, e))
}

struct Stage {
    filter: UniverseFilter,
    pipeline: Pipeline,
    fits: Vec<((usize, SeasonalSelection), FitPanel)>,
}

impl Stage {
    fn fits(&self, depth: usize, seasonal: &SeasonalSelection) -> Option<&FitPanel> {
        self.fits.iter().find(|((d, s), _)| *d == depth && s == seasonal).map(|(_, f)| f)
    }
}

fn strategy_filter(base: &UniverseFilter, s: &ResolvedStrategy) -> UniverseFilter {
    let mut f = base.clone();
    if let Some(sectors) = &s.sectors {
        f.sectors = Some(match &base.sectors {
            Some(b) => sectors.iter().filter(|x| b.contains(x)).copied().collect(),
            None => sectors.clone(),
        });
    }
    f
}

fn needs_fits(s: &ResolvedStrategy) -> bool {
    matches!(s.spec.family, Family::Level | Family::Slope | Family::Curvature) && s.signal.source == SignalSource::NelsonSiegel
}

fn in_module(module: &str, e: impl Into<CliError>) -> CliError {
    match e.into() {
        CliError::Validation(m) => CliError::Validation(format!("{module}: {m}")),
        CliError::Data(m) => CliError::Data(format!("{module}: {m}")),
        CliError::Numerical(m) => CliError::Numerical(format!("{module}: {m}")),
    }
}

/// Fit, signals, books, backtests and reports for every configured strategy.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    let strategies = cfg.strategies()?;
    let costs = cfg.costs()?;
    let market = load_market(cfg)?;
    let base = cfg.filter()?;

    let mut stages: Vec<Stage> = Vec::new();
    let mut stage_of = Vec::with_capacity(strategies.len());
    for filter in std::iter::once(base.clone()).chain(strategies.iter().map(|s| strategy_filter(&base, s))) {
        if let Some(i) = stages.iter().position(|st| st.filter == filter) {
            stage_of.push(i);
            continue;
        }
        let pipeline = Pipeline::new(&market, &filter).map_err(|e| in_module("marketdata", e))?;
        stages.push(Stage { filter, pipeline, fits: Vec::new() });
        stage_of.push(stages.len() - 1);
    }
    stage_of.remove(0);

    let mut wanted: Vec<(usize, usize, SeasonalSelection)> = vec![(0, cfg.fit.depth, cfg.fit.seasonal.clone())];
    for (s, &st) in strategies.iter().zip(&stage_of) {
        let key = (st, s.signal.fit_depth, s.signal.seasonal.clone());
        if needs_fits(s) && !wanted.contains(&key) {
            wanted.push(key);
        }
    }
    for (st, depth, seasonal) in wanted {
        let fits = stages[st].pipeline.fits(depth, &seasonal).map_err(|e| in_module("nscurve", e))?;
        stages[st].fits.push(((depth, seasonal), fits));
    }

    let results_dir = out.join("results");
    if results_dir.exists() {
        std::fs::remove_dir_all(&results_dir).map_err(|e| io_error(&results_dir, e))?;
    }
    create_dir(&results_dir)?;
    create_dir(&out.join("series"))?;
    if cfg.output.books {
        create_dir(&out.join("books"))?;
    }
    if cfg.output.signals {
        create_dir(&out.join("signals"))?;
    }

    let results: Vec<Result<BacktestResult, CliError>> = strategies
        .par_iter()
        .zip(&stage_of)
        .map(|(s, &st)| {
            let stage = &stages[st];
            let label = |m: &str| format!("{m} [{}]", s.name);
            let fits = stage.fits(s.signal.fit_depth, &s.signal.seasonal);
            let signal = stage.pipeline.signal(&s.spec, &s.signal, fits).map_err(|e| in_module(&label("signals"), e))?;
            let book = stage.pipeline.book(&s.spec, signal.as_ref()).map_err(|e| in_module(&label("portfolio"), e))?;
            if cfg.output.books {
                let path = out.join("books").join(format!("{}.csv", s.name));
                book.write_csv(&path).map_err(|e| io_error(&path, e))?;
            }
            if let (true, Some(sig)) = (cfg.output.signals, &signal) {
                let path = out.join("signals").join(format!("{}.csv", s.name));
                sig.write_csv(&path).map_err(|e| io_error(&path, e))?;
            }
            stage.pipeline.evaluate(&s.spec, &book, &costs).map_err(|e| in_module(&label("backtest"), e))
        })
        .collect();

    let results: Vec<BacktestResult> = results.into_iter().collect::<Result<_, _>>()?;
    for (s, r) in strategies.iter().zip(&results) {
        let path = results_dir.join(format!("{}.csv", s.name));
        r.write_csv(&path).map_err(|e| io_error(&path, e))?;
    }

    let fits = stages[0].fits(cfg.fit.depth, &cfg.fit.seasonal).expect("base fits computed");
    report::write_series(&out.join("series").join("dispersion.csv"), &dispersion_series(fits))?;

    let text = toml::to_string(cfg).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    write_file(&out.join("run_config.toml"), &text)?;
    let report_cfg = toml::to_string(&cfg.report_config()).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    write_file(&out.join("report.toml"), &report_cfg)?;
    report::cmd_report(out)
}

/// Output directory: flag first, then the config file.
pub fn output_dir(flag: Option<PathBuf>, cfg: Option<&RunConfig>) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.and_then(|c| c.out.clone()))
        .ok_or_else(|| CliError::Validation("no output directory: pass --out or set 'out' in the config".into()))
}
