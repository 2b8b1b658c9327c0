//! Synthetic futures markets driven by Nelson-Siegel factor dynamics.
//!
//! Each commodity's betas evolve as
//! `Δβ_t = φ Δβ_{t-1} + κ (β_0 - β_{t-1}) + σ ε_t` and every listed contract is
//! priced off the day's curve (optionally with a seasonal cosine term) plus
//! i.i.d. Gaussian noise. The decay factor on each day is the one a fit of the
//! first `lambda_depth` locations would use, so noise-free curves are exactly
//! representable at that depth.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roll::roll_cutoff;
use super::universe::UNIVERSE;
use super::{
    Bar, CommoditySpec, ContractChain, ContractSeries, CotRow, CotSeries, MarketDataError, Sector, SpecTable,
    DAYS_PER_MONTH,
};
use crate::calendar::{add_months, business_days, month_key, months_between, weekday_on_or_before};
use crate::nscurve::{curvature_loading, decay_factor, slope_loading, SEASONAL_OMEGA};

const MONTH_CODES: [char; 12] = ['F', 'G', 'H', 'J', 'K', 'M', 'N', 'Q', 'U', 'V', 'X', 'Z'];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDynamics {
    pub initial: f64,
    /// AR(1) coefficient of the daily change, in (-1, 1).
    #[serde(default)]
    pub persistence: f64,
    #[serde(default)]
    pub innovation_sd: f64,
    /// Pull of the level back towards `initial`, per day.
    #[serde(default)]
    pub mean_reversion: f64,
}

impl FactorDynamics {
    pub fn constant(initial: f64) -> Self {
        Self { initial, persistence: 0.0, innovation_sd: 0.0, mean_reversion: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimCommodity {
    pub id: String,
    pub sector: Sector,
    pub multiplier: f64,
    pub tick_size: f64,
    pub level: FactorDynamics,
    pub slope: FactorDynamics,
    pub curvature: FactorDynamics,
    /// Standard deviation of additive i.i.d. price noise.
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub seasonal_amplitude: f64,
    #[serde(default = "default_theta")]
    pub seasonal_theta: u32,
    #[serde(default = "default_oi")]
    pub open_interest: f64,
    /// Open interest decays as `exp(-oi_decay · rank)` along the curve.
    #[serde(default = "default_oi_decay")]
    pub oi_decay: f64,
    #[serde(default = "default_volume")]
    pub volume: f64,
    #[serde(default = "default_cot_short")]
    pub cot_short: f64,
    #[serde(default = "default_cot_long")]
    pub cot_long: f64,
}

fn default_theta() -> u32 {
    1
}
fn default_oi() -> f64 {
    50_000.0
}
fn default_oi_decay() -> f64 {
    0.35
}
fn default_volume() -> f64 {
    10_000.0
}
fn default_cot_short() -> f64 {
    60_000.0
}
fn default_cot_long() -> f64 {
    40_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub start: NaiveDate,
    /// Number of business days (Monday-Friday).
    pub days: usize,
    /// Contracts are listed this many months ahead of expiry.
    #[serde(default = "default_listed")]
    pub listed_months: u32,
    /// Expiry day of month (moved back to a weekday).
    #[serde(default = "default_expiry_day")]
    pub expiry_day: u32,
    /// Depth whose mean maturity sets each day's decay factor.
    #[serde(default = "default_lambda_depth")]
    pub lambda_depth: usize,
    pub commodities: Vec<SimCommodity>,
}

fn default_listed() -> u32 {
    13
}
fn default_expiry_day() -> u32 {
    20
}
fn default_lambda_depth() -> usize {
    4
}

impl SimConfig {
    /// The 21-commodity reference universe with scale-aware dynamics. Slope
    /// changes follow an AR(1) with coefficient `slope_persistence`.
    pub fn reference(start: NaiveDate, days: usize, slope_persistence: f64) -> Self {
        let commodities = UNIVERSE
            .iter()
            .enumerate()
            .map(|(i, (id, sector, multiplier, tick, price))| {
                let p = *price;
                // mild heterogeneity in curve shapes across commodities
                let tilt = 1.0 + 0.1 * ((i % 5) as f64 - 2.0);
                SimCommodity {
                    id: id.to_string(),
                    sector: *sector,
                    multiplier: *multiplier,
                    tick_size: *tick,
                    level: FactorDynamics { initial: p, persistence: 0.0, innovation_sd: 0.008 * p, mean_reversion: 0.002 },
                    slope: FactorDynamics {
                        initial: -0.04 * p * tilt,
                        persistence: slope_persistence,
                        innovation_sd: 0.002 * p,
                        mean_reversion: 0.01,
                    },
                    curvature: FactorDynamics { initial: 0.02 * p, persistence: 0.0, innovation_sd: 0.001 * p, mean_reversion: 0.01 },
                    noise_sd: 0.00005 * p,
                    seasonal_amplitude: 0.0,
                    seasonal_theta: 1,
                    open_interest: default_oi(),
                    oi_decay: default_oi_decay(),
                    volume: default_volume(),
                    cot_short: default_cot_short() * (0.8 + 0.02 * i as f64),
                    cot_long: default_cot_long() * (1.2 - 0.02 * i as f64),
                }
            })
            .collect();
        Self {
            start,
            days,
            listed_months: default_listed(),
            expiry_day: default_expiry_day(),
            lambda_depth: default_lambda_depth(),
            commodities,
        }
    }

    pub fn parse(text: &str) -> Result<Self, MarketDataError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| MarketDataError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("simulator config serializes")
    }

    pub fn specs(&self) -> SpecTable {
        SpecTable(
            self.commodities
                .iter()
                .map(|c| {
                    (c.id.clone(), CommoditySpec { sector: c.sector, multiplier: c.multiplier, tick_size: c.tick_size })
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<(), MarketDataError> {
        let err = |m: String| Err(MarketDataError::Config(m));
        if self.days < 2 {
            return err("simulation needs at least 2 days".into());
        }
        if self.lambda_depth == 0 || self.listed_months as usize <= self.lambda_depth {
            return err(format!(
                "listed_months ({}) must exceed lambda_depth ({})",
                self.listed_months, self.lambda_depth
            ));
        }
        if !(1..=28).contains(&self.expiry_day) {
            return err(format!("expiry_day must be in 1..=28, got {}", self.expiry_day));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.commodities {
            if !seen.insert(c.id.as_str()) {
                return err(format!("duplicate commodity '{}'", c.id));
            }
            for (name, f) in [("level", &c.level), ("slope", &c.slope), ("curvature", &c.curvature)] {
                if !(f.persistence > -1.0 && f.persistence < 1.0) {
                    return err(format!("{}: {name} persistence {} outside (-1, 1)", c.id, f.persistence));
                }
                if f.innovation_sd < 0.0 || f.mean_reversion < 0.0 {
                    return err(format!("{}: {name} innovation_sd and mean_reversion must be non-negative", c.id));
                }
            }
            if c.noise_sd < 0.0 || !(c.multiplier > 0.0) || !(c.tick_size > 0.0) {
                return err(format!("{}: noise_sd must be non-negative, multiplier and tick_size positive", c.id));
            }
            if !(1..=12).contains(&c.seasonal_theta) {
                return err(format!("{}: seasonal_theta must be in 1..=12", c.id));
            }
        }
        Ok(())
    }
}

/// Ground-truth curve parameters for one commodity-day.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub date: NaiveDate,
    pub commodity_id: String,
    pub beta_level: f64,
    pub beta_slope: f64,
    pub beta_curvature: f64,
    pub lambda: f64,
    pub beta_seasonal: f64,
    pub theta: u32,
}

#[derive(Debug, Clone)]
pub struct SimulatedMarket {
    pub chains: Vec<ContractChain>,
    pub truth: Vec<TruthRow>,
    pub cot: BTreeMap<String, CotSeries>,
    pub specs: SpecTable,
}

impl SimulatedMarket {
    pub fn write_truth_csv(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "date,commodity,beta_level,beta_slope,beta_curvature,lambda,beta_seasonal,theta")?;
        for t in &self.truth {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t.date, t.commodity_id, t.beta_level, t.beta_slope, t.beta_curvature, t.lambda, t.beta_seasonal, t.theta
            )?;
        }
        out.flush()
    }
}

struct Listing {
    code: String,
    expiry: NaiveDate,
    cutoff: Option<NaiveDate>,
}

/// Generates chains, ground-truth betas and CoT positions. Deterministic in
/// `(config, seed)`; each commodity draws from its own random stream.
pub fn simulate_market(config: &SimConfig, seed: u64) -> Result<SimulatedMarket, MarketDataError> {
    config.validate()?;
    let calendar = business_days(config.start, config.days);
    let first = month_key(calendar[0]);
    let last = month_key(*calendar.last().expect("days >= 2"));
    let span = months_between(first, last) + config.listed_months as i32 + 1;
    let listings: Vec<Listing> = (0..=span)
        .map(|k| {
            let key = add_months(first, k);
            let expiry = weekday_on_or_before(key, config.expiry_day);
            let code = format!("{}{}", MONTH_CODES[key.1 as usize - 1], key.0);
            Listing { code, expiry, cutoff: roll_cutoff(&calendar, expiry) }
        })
        .collect();

    let results: Vec<Result<(ContractChain, Vec<TruthRow>, CotSeries), MarketDataError>> = config
        .commodities
        .par_iter()
        .enumerate()
        .map(|(i, c)| simulate_commodity(config, c, &calendar, &listings, seed, i as u64))
        .collect();

    let mut chains = Vec::new();
    let mut truth = Vec::new();
    let mut cot = BTreeMap::new();
    for r in results {
        let (chain, t, c) = r?;
        chains.push(chain);
        truth.extend(t);
        cot.insert(c.commodity_id.clone(), c);
    }
    Ok(SimulatedMarket { chains, truth, cot, specs: config.specs() })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn simulate_commodity(
    config: &SimConfig,
    c: &SimCommodity,
    calendar: &[NaiveDate],
    listings: &[Listing],
    seed: u64,
    stream: u64,
) -> Result<(ContractChain, Vec<TruthRow>, CotSeries), MarketDataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream + 1);

    let factors = [&c.level, &c.slope, &c.curvature];
    let mut beta = [c.level.initial, c.slope.initial, c.curvature.initial];
    let mut delta = [0.0; 3];
    let mut rows: Vec<Vec<Bar>> = vec![Vec::new(); listings.len()];
    let mut truth = Vec::with_capacity(calendar.len());
    let mut cot_rows = Vec::new();

    for (day, &date) in calendar.iter().enumerate() {
        if day > 0 {
            for k in 0..3 {
                let f = factors[k];
                delta[k] = f.persistence * delta[k] + f.mean_reversion * (f.initial - beta[k]) + f.innovation_sd * normal(&mut rng);
                beta[k] += delta[k];
            }
        }
        let live: Vec<usize> = listings
            .iter()
            .enumerate()
            .filter(|(_, l)| date < l.expiry && months_between(month_key(date), month_key(l.expiry)) <= config.listed_months as i32)
            .map(|(j, _)| j)
            .collect();
        let eligible: Vec<usize> = live
            .iter()
            .copied()
            .filter(|j| listings[*j].cutoff.is_some_and(|cut| date < cut))
            .take(config.lambda_depth)
            .collect();
        if eligible.len() < config.lambda_depth {
            return Err(MarketDataError::Config(format!(
                "{}: only {} eligible contracts on {date}; increase listed_months",
                c.id,
                eligible.len()
            )));
        }
        let maturity = |j: usize| (listings[j].expiry - date).num_days() as f64 / DAYS_PER_MONTH;
        let avg = eligible.iter().map(|j| maturity(*j)).sum::<f64>() / eligible.len() as f64;
        let lambda = decay_factor(avg).map_err(|e| MarketDataError::Domain(e.to_string()))?;
        truth.push(TruthRow {
            date,
            commodity_id: c.id.clone(),
            beta_level: beta[0],
            beta_slope: beta[1],
            beta_curvature: beta[2],
            lambda,
            beta_seasonal: c.seasonal_amplitude,
            theta: c.seasonal_theta,
        });
        for (rank, &j) in live.iter().enumerate() {
            let m = maturity(j);
            let mut price = beta[0] + beta[1] * slope_loading(lambda, m) + beta[2] * curvature_loading(lambda, m);
            if c.seasonal_amplitude != 0.0 {
                price += c.seasonal_amplitude * (SEASONAL_OMEGA * m - SEASONAL_OMEGA * c.seasonal_theta as f64).cos();
            }
            if c.noise_sd > 0.0 {
                price += c.noise_sd * normal(&mut rng);
            }
            if !(price > 0.0) {
                return Err(MarketDataError::Domain(format!(
                    "{}: simulated price {price} for {} on {date} is not positive",
                    c.id, listings[j].code
                )));
            }
            let shape = (-c.oi_decay * rank as f64).exp();
            let oi = (c.open_interest * shape * (0.1 * normal(&mut rng)).exp()).round();
            let volume = (c.volume * shape * (0.2 * normal(&mut rng)).exp()).round();
            rows[j].push(Bar { date, settle: price, volume, open_interest: oi });
        }
        if date.weekday() == Weekday::Tue {
            cot_rows.push(CotRow {
                date,
                commercial_short: (c.cot_short * (0.1 * normal(&mut rng)).exp()).round(),
                commercial_long: (c.cot_long * (0.1 * normal(&mut rng)).exp()).round(),
            });
        }
    }

    let contracts = listings
        .iter()
        .zip(rows)
        .filter(|(_, r)| !r.is_empty())
        .map(|(l, r)| ContractSeries { commodity_id: c.id.clone(), contract_code: l.code.clone(), expiry: l.expiry, rows: r })
        .collect();
    let chain = ContractChain {
        commodity_id: c.id.clone(),
        sector: c.sector,
        multiplier: c.multiplier,
        tick_size: c.tick_size,
        contracts,
    };
    Ok((chain, truth, CotSeries { commodity_id: c.id.clone(), rows: cot_rows }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::{roll_schedule, snapshot_from_schedule};
    use crate::nscurve::{fit_ns, ComponentSet};

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2001, 1, 2).unwrap()
    }

    #[test]
    fn same_seed_same_market() {
        let cfg = SimConfig::reference(start(), 60, 0.3);
        let a = simulate_market(&cfg, 9).unwrap();
        let b = simulate_market(&cfg, 9).unwrap();
        assert_eq!(a.chains, b.chains);
        assert_eq!(a.truth, b.truth);
        let c = simulate_market(&cfg, 10).unwrap();
        assert_ne!(a.chains, c.chains);
    }

    #[test]
    fn invalid_persistence_rejected() {
        let mut cfg = SimConfig::reference(start(), 10, 0.3);
        cfg.commodities[0].slope.persistence = 1.0;
        assert!(matches!(simulate_market(&cfg, 1), Err(MarketDataError::Config(_))));
    }

    #[test]
    fn depth_twelve_always_available() {
        let cfg = SimConfig::reference(start(), 300, 0.0);
        let m = simulate_market(&cfg, 3).unwrap();
        let s = roll_schedule(&m.chains[0], 12).unwrap();
        assert!(s.days.iter().all(|d| d.locations.is_some()));
    }

    #[test]
    fn noise_free_constant_betas_are_recovered() {
        let mut cfg = SimConfig::reference(start(), 80, 0.0);
        cfg.commodities.truncate(2);
        for c in &mut cfg.commodities {
            c.noise_sd = 0.0;
            c.level.innovation_sd = 0.0;
            c.slope.innovation_sd = 0.0;
            c.curvature.innovation_sd = 0.0;
        }
        let m = simulate_market(&cfg, 5).unwrap();
        let chain = &m.chains[1];
        let sched = roll_schedule(chain, 4).unwrap();
        let truth: Vec<&TruthRow> = m.truth.iter().filter(|t| t.commodity_id == chain.commodity_id).collect();
        for (day, t) in sched.days.iter().zip(truth) {
            let snap = snapshot_from_schedule(chain, &sched, day.date).unwrap();
            let fit = fit_ns(&snap, ComponentSet::full()).unwrap();
            assert!((fit.beta_level - t.beta_level).abs() <= 1e-9 * t.beta_level.abs());
            assert!((fit.beta_slope - t.beta_slope).abs() <= 1e-9 * t.beta_slope.abs());
            assert!((fit.beta_curvature - t.beta_curvature).abs() <= 1e-9 * t.beta_curvature.abs());
            assert!((fit.lambda - t.lambda).abs() < 1e-14);
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = SimConfig::reference(start(), 10, 0.3);
        assert_eq!(SimConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
