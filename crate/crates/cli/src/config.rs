//! Declarative run configuration (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use curvespread::backtest::{CostModel, DriftConvention, SignalOptions, SignalSource, UniverseFilter};
use curvespread::marketdata::{Sector, SimConfig};
use curvespread::nscurve::SeasonalSelection;
use curvespread::perfstats::{Frequency, Lag, SummaryOptions};
use curvespread::portfolio::{Calibration, Family, Mode, StrategySpec};
use curvespread::signals::CharacteristicParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; outputs do not depend on it.
    #[serde(default = "one", skip_serializing)]
    pub threads: usize,
    /// Output directory, relative to the config file.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    #[serde(default)]
    pub universe: UniverseConfig,
    #[serde(default)]
    pub fit: FitConfig,
    pub strategies: Vec<StrategyConfig>,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default)]
    pub timing: TimingSection,
    #[serde(default)]
    pub characteristics: CharacteristicsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Exactly one of `simulate`, `sim_config` or `prices_dir` (with `spec_file`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub simulate: Option<SimSpec>,
    pub sim_config: Option<PathBuf>,
    pub prices_dir: Option<PathBuf>,
    pub spec_file: Option<PathBuf>,
    pub cot_file: Option<PathBuf>,
}

/// Reference simulated universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_start")]
    pub start: NaiveDate,
    #[serde(default = "default_days")]
    pub days: usize,
    #[serde(default = "default_persistence")]
    pub slope_persistence: f64,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1992, 1, 2).expect("valid date")
}
fn default_days() -> usize {
    7000
}
fn default_persistence() -> f64 {
    0.3
}

impl Default for SimSpec {
    fn default() -> Self {
        Self { start: default_start(), days: default_days(), slope_persistence: default_persistence() }
    }
}

impl SimSpec {
    pub fn to_sim_config(&self) -> SimConfig {
        SimConfig::reference(self.start, self.days, self.slope_persistence)
    }
}

/// Reads a simulator config: a full simulator file or the short reference form.
pub fn load_sim_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io_error(path, e))?;
    match SimConfig::parse(&text) {
        Ok(cfg) => Ok(cfg),
        Err(full) => match toml::from_str::<SimSpec>(&text) {
            Ok(spec) => {
                let cfg = spec.to_sim_config();
                cfg.validate()?;
                Ok(cfg)
            }
            Err(_) => Err(full.into()),
        },
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseConfig {
    pub commodities: Option<Vec<String>>,
    pub sectors: Option<Vec<String>>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seasonal: SeasonalSelection,
}

fn default_depth() -> usize {
    4
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { depth: default_depth(), seasonal: SeasonalSelection::None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    /// Output label; defaults to the family name.
    pub name: Option<String>,
    pub family: String,
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Far location of the slope spread (4, 6 or 12).
    pub far: Option<usize>,
    pub fit_depth: Option<usize>,
    pub seasonal: Option<SeasonalSelection>,
    /// Moving-average window of the signal (1, 3 or 5).
    #[serde(default = "one")]
    pub smoothing: usize,
    /// `ns`, `dslope`, `dpc2` or `ry<k>`.
    #[serde(default = "default_signal")]
    pub signal: String,
    pub sectors: Option<Vec<String>>,
}

fn default_mode() -> String {
    "cross-sectional".into()
}
fn default_signal() -> String {
    "ns".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default = "default_commission")]
    pub commission: f64,
    #[serde(default = "default_flat")]
    pub flat_rate: f64,
    #[serde(default = "default_ticks")]
    pub n_ticks: f64,
    #[serde(default = "yes")]
    pub spread_ticket: bool,
    /// `gross-preserving` or `raw`.
    #[serde(default = "default_drift")]
    pub drift: String,
}

fn default_commission() -> f64 {
    1.5
}
fn default_flat() -> f64 {
    0.000167
}
fn default_ticks() -> f64 {
    0.25
}
fn default_drift() -> String {
    "gross-preserving".into()
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            commission: default_commission(),
            flat_rate: default_flat(),
            n_ticks: default_ticks(),
            spread_ticket: true,
            drift: default_drift(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    /// Strategy whose returns are timed; the first slope strategy when unset.
    pub strategy: Option<String>,
    #[serde(default = "default_windows")]
    pub windows: Vec<usize>,
    /// `full` or `expanding`.
    #[serde(default = "default_calibration")]
    pub calibration: String,
    #[serde(default = "default_min_obs")]
    pub min_obs: usize,
}

fn default_windows() -> Vec<usize> {
    vec![3, 5, 10, 15, 22]
}
fn default_calibration() -> String {
    "full".into()
}
fn default_min_obs() -> usize {
    22
}

impl Default for TimingSection {
    fn default() -> Self {
        Self { strategy: None, windows: default_windows(), calibration: default_calibration(), min_obs: default_min_obs() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicsConfig {
    #[serde(default = "d252")]
    pub skew_days: usize,
    #[serde(default = "d42")]
    pub liq_days: usize,
    #[serde(default = "d12")]
    pub momentum_months: usize,
    #[serde(default = "d52")]
    pub hp_weeks: usize,
    #[serde(default = "d5")]
    pub pca_window: usize,
}

fn d252() -> usize {
    252
}
fn d42() -> usize {
    42
}
fn d12() -> usize {
    12
}
fn d52() -> usize {
    52
}
fn d5() -> usize {
    5
}

impl Default for CharacteristicsConfig {
    fn default() -> Self {
        Self { skew_days: 252, liq_days: 42, momentum_months: 12, hp_weeks: 52, pca_window: 5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write weight books next to the results.
    #[serde(default)]
    pub books: bool,
    /// Write signal panels next to the results.
    #[serde(default)]
    pub signals: bool,
}

/// Settings read back by the `report` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_cuts")]
    pub subsample_cuts: Vec<NaiveDate>,
    #[serde(default = "d252f")]
    pub periods_per_year: f64,
    #[serde(default = "d5f")]
    pub risk_aversion: f64,
    /// Newey-West lag; automatic when unset.
    pub nw_lag: Option<usize>,
    #[serde(default)]
    pub bias_corrected_moments: bool,
    #[serde(default)]
    pub spanning: Vec<SpanningConfig>,
    #[serde(default)]
    pub conditional: Vec<ConditionalConfig>,
    #[serde(default = "yes")]
    pub weekday: bool,
    #[serde(default)]
    pub blends: Vec<[String; 2]>,
    pub risk_free: Option<PathBuf>,
    #[serde(default)]
    pub timing: TimingSection,
}

fn default_cuts() -> Vec<NaiveDate> {
    vec![
        NaiveDate::from_ymd_opt(2000, 12, 31).expect("valid date"),
        NaiveDate::from_ymd_opt(2009, 3, 31).expect("valid date"),
    ]
}
fn d252f() -> f64 {
    252.0
}
fn d5f() -> f64 {
    5.0
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            subsample_cuts: default_cuts(),
            periods_per_year: 252.0,
            risk_aversion: 5.0,
            nw_lag: None,
            bias_corrected_moments: false,
            spanning: Vec::new(),
            conditional: Vec::new(),
            weekday: true,
            blends: Vec::new(),
            risk_free: None,
            timing: TimingSection::default(),
        }
    }
}

impl ReportConfig {
    pub fn lag(&self) -> Lag {
        self.nw_lag.map_or(Lag::Auto, Lag::Fixed)
    }

    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions {
            periods_per_year: self.periods_per_year,
            risk_aversion: self.risk_aversion,
            lag: self.lag(),
            bias_corrected: self.bias_corrected_moments,
        }
    }

    pub fn calibration(&self) -> Result<Calibration, CliError> {
        match self.timing.calibration.as_str() {
            "full" => Ok(Calibration::FullSample),
            "expanding" => Ok(Calibration::Expanding { min_obs: self.timing.min_obs }),
            other => Err(CliError::Validation(format!("timing.calibration must be 'full' or 'expanding', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanningConfig {
    pub strategy: String,
    pub factors: Vec<String>,
    /// `daily` or `monthly`.
    #[serde(default = "default_frequency")]
    pub frequency: String,
    /// `gross`, `net_tc1`, `net_tc2` or `net_tc3`.
    #[serde(default = "default_series")]
    pub series: String,
}

fn default_frequency() -> String {
    "monthly".into()
}
fn default_series() -> String {
    "net_tc1".into()
}

impl SpanningConfig {
    pub fn frequency(&self) -> Result<Frequency, CliError> {
        match self.frequency.as_str() {
            "daily" => Ok(Frequency::Daily),
            "monthly" => Ok(Frequency::Monthly),
            other => Err(CliError::Validation(format!("spanning frequency must be 'daily' or 'monthly', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalConfig {
    pub strategy: String,
    /// `dispersion` or a CSV file with `date,value` rows.
    pub indicator: String,
    #[serde(default = "default_series")]
    pub series: String,
}

/// A validated strategy ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStrategy {
    pub name: String,
    pub spec: StrategySpec,
    pub signal: SignalOptions,
    pub sectors: Option<Vec<Sector>>,
}

pub const SERIES: [&str; 4] = ["gross", "net_tc1", "net_tc2", "net_tc3"];

fn parse_sectors(list: &[String]) -> Result<Vec<Sector>, CliError> {
    list.iter().map(|s| s.parse::<Sector>().map_err(|e| CliError::Validation(e.to_string()))).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Reads a config and makes its relative paths relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::io_error(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut cfg.out);
        fix(&mut cfg.data.sim_config);
        fix(&mut cfg.data.prices_dir);
        fix(&mut cfg.data.spec_file);
        fix(&mut cfg.data.cot_file);
        fix(&mut cfg.report.risk_free);
        for c in &mut cfg.report.conditional {
            if c.indicator != "dispersion" && Path::new(&c.indicator).is_relative() {
                c.indicator = base.join(&c.indicator).display().to_string();
            }
        }
        Ok(cfg)
    }

    pub fn costs(&self) -> Result<CostModel, CliError> {
        let drift = match self.costs.drift.as_str() {
            "gross-preserving" => DriftConvention::GrossPreserving,
            "raw" => DriftConvention::Raw,
            other => return Err(CliError::Validation(format!("costs.drift must be 'gross-preserving' or 'raw', got '{other}'"))),
        };
        let model = CostModel {
            commission: self.costs.commission,
            flat_rate: self.costs.flat_rate,
            n_ticks: self.costs.n_ticks,
            spread_ticket: self.costs.spread_ticket,
            drift,
        };
        model.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(model)
    }

    pub fn filter(&self) -> Result<UniverseFilter, CliError> {
        Ok(UniverseFilter {
            sectors: self.universe.sectors.as_deref().map(parse_sectors).transpose()?,
            commodities: self.universe.commodities.clone(),
            from: self.universe.from,
            to: self.universe.to,
        })
    }

    pub fn characteristic_params(&self) -> CharacteristicParams {
        CharacteristicParams {
            skew_days: self.characteristics.skew_days,
            liq_days: self.characteristics.liq_days,
            momentum_months: self.characteristics.momentum_months,
            hp_weeks: self.characteristics.hp_weeks,
        }
    }

    pub fn strategies(&self) -> Result<Vec<ResolvedStrategy>, CliError> {
        let invalid = |m: String| CliError::Validation(m);
        if self.strategies.is_empty() {
            return Err(invalid("config: strategy list is empty".into()));
        }
        let mut names = BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.strategies {
            let family: Family = s.family.parse().map_err(invalid)?;
            let mut spec = StrategySpec::new(family);
            spec.mode = match s.mode.as_str() {
                "cross-sectional" => Mode::CrossSectional,
                "time-series" => Mode::TimeSeries,
                other => return Err(invalid(format!("strategy mode must be 'cross-sectional' or 'time-series', got '{other}'"))),
            };
            if let Some(far) = s.far {
                if family != Family::Slope {
                    return Err(invalid(format!("'far' only applies to the S family, not {family}")));
                }
                spec = spec.with_far_location(far);
            }
            spec.validate().map_err(invalid)?;
            if ![1, 3, 5].contains(&s.smoothing) {
                return Err(invalid(format!("smoothing must be 1, 3 or 5, got {}", s.smoothing)));
            }
            let source = match s.signal.as_str() {
                "ns" => SignalSource::NelsonSiegel,
                "dslope" => SignalSource::SlopeDiff,
                "dpc2" => SignalSource::Pc2,
                other => match other.strip_prefix("ry").and_then(|k| k.parse::<usize>().ok()) {
                    Some(k) if [2, 3, 4, 6, 12].contains(&k) => SignalSource::RollYield(k),
                    _ => return Err(invalid(format!("unknown signal '{other}'"))),
                },
            };
            if source != SignalSource::NelsonSiegel && family != Family::Slope {
                return Err(invalid(format!("signal '{}' is only defined for the S family", s.signal)));
            }
            let fit_depth = s.fit_depth.unwrap_or(self.fit.depth);
            if ![4, 6, 12].contains(&fit_depth) {
                return Err(invalid(format!("fit depth must be 4, 6 or 12, got {fit_depth}")));
            }
            let seasonal = s.seasonal.clone().unwrap_or_else(|| self.fit.seasonal.clone());
            if seasonal != SeasonalSelection::None && fit_depth <= 4 {
                return Err(invalid("the seasonal model needs a fit depth above 4".into()));
            }
            let name = s.name.clone().unwrap_or_else(|| family.to_string());
            if name.is_empty() || name.contains(['/', '\\', ',']) {
                return Err(invalid(format!("invalid strategy name '{name}'")));
            }
            if !names.insert(name.clone()) {
                return Err(invalid(format!("duplicate strategy name '{name}'")));
            }
            out.push(ResolvedStrategy {
                name,
                spec,
                signal: SignalOptions {
                    source,
                    fit_depth,
                    seasonal,
                    smoothing: s.smoothing,
                    pca_window: self.characteristics.pca_window,
                    characteristics: self.characteristic_params(),
                },
                sectors: s.sectors.as_deref().map(parse_sectors).transpose()?,
            });
        }
        Ok(out)
    }

    /// Checks everything that can be checked without loading data.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: &str| Err(CliError::Validation(m.to_string()));
        let sources = [self.data.simulate.is_some(), self.data.sim_config.is_some(), self.data.prices_dir.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return invalid("data: set exactly one of 'simulate', 'sim_config' or 'prices_dir'");
        }
        if self.data.prices_dir.is_some() && self.data.spec_file.is_none() {
            return invalid("data: 'prices_dir' requires 'spec_file'");
        }
        if self.threads == 0 {
            return invalid("threads must be at least 1");
        }
        if let (Some(f), Some(t)) = (self.universe.from, self.universe.to) {
            if f > t {
                return invalid("universe: 'from' is after 'to'");
            }
        }
        self.filter()?;
        self.costs()?;
        let strategies = self.strategies()?;
        let names: BTreeSet<&str> = strategies.iter().map(|s| s.name.as_str()).collect();
        let known = |n: &str, what: &str| {
            if names.contains(n) {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{what} references unknown strategy '{n}'")))
            }
        };
        let r = &self.report;
        for s in &r.spanning {
            known(&s.strategy, "spanning")?;
            for f in &s.factors {
                known(f, "spanning")?;
            }
            s.frequency()?;
            check_series(&s.series)?;
        }
        for c in &r.conditional {
            known(&c.strategy, "conditional")?;
            check_series(&c.series)?;
        }
        for [a, b] in &r.blends {
            known(a, "blend")?;
            known(b, "blend")?;
        }
        if let Some(t) = &self.timing.strategy {
            known(t, "timing")?;
        }
        if self.timing.windows.iter().any(|w| ![3, 5, 10, 15, 22].contains(w)) {
            return invalid("timing windows must be drawn from 3, 5, 10, 15, 22");
        }
        if r.subsample_cuts.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("report: subsample cuts must be increasing");
        }
        if !(r.periods_per_year > 0.0) || !(r.risk_aversion > 0.0) {
            return invalid("report: periods_per_year and risk_aversion must be positive");
        }
        let c = &self.characteristics;
        if c.skew_days < 2 || c.liq_days < 1 || c.momentum_months < 1 || c.hp_weeks < 1 || c.pca_window < 2 {
            return invalid("characteristics: windows too short");
        }
        Ok(())
    }

    /// Report settings persisted with the results, with the timing section folded in.
    pub fn report_config(&self) -> ReportConfig {
        let mut r = self.report.clone();
        r.timing = self.timing.clone();
        r
    }
}

pub fn check_series(s: &str) -> Result<(), CliError> {
    if SERIES.contains(&s) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("series must be one of {}, got '{s}'", SERIES.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[data.simulate]
days = 300
[[strategies]]
family = "S"
"#;

    #[test]
    fn minimal_config_has_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.timing.windows, vec![3, 5, 10, 15, 22]);
        assert_eq!(cfg.costs().unwrap(), CostModel::default());
        assert_eq!(cfg.report.subsample_cuts.len(), 2);
        let s = cfg.strategies().unwrap();
        assert_eq!(s[0].name, "S");
        assert_eq!(s[0].signal.fit_depth, 4);
    }

    #[test]
    fn empty_strategy_list_rejected() {
        let cfg = RunConfig::parse("[data.simulate]\nstrategies = []\n").map(|_| ()).err();
        assert!(cfg.is_some());
        let cfg = RunConfig::parse("strategies = []\n[data.simulate]\n").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Validation(_))));
    }

    #[test]
    fn bad_values_rejected() {
        for extra in [
            "far = 5",
            "smoothing = 2",
            "signal = \"ry7\"",
            "fit_depth = 5",
            "mode = \"sideways\"",
        ] {
            let text = format!("[data.simulate]\n[[strategies]]\nfamily = \"S\"\n{extra}\n");
            let cfg = RunConfig::parse(&text).unwrap();
            assert!(cfg.validate().is_err(), "{extra}");
        }
        let unknown = "[data.simulate]\n[[strategies]]\nfamily = \"S\"\n[report]\nblends = [[\"S\", \"MOM\"]]\n";
        assert!(RunConfig::parse(unknown).unwrap().validate().is_err());
    }

    #[test]
    fn two_data_sources_rejected() {
        let text = "[data]\nprices_dir = \"p\"\nspec_file = \"s\"\n[data.simulate]\n[[strategies]]\nfamily = \"S\"\n";
        assert!(RunConfig::parse(text).unwrap().validate().is_err());
    }
}
