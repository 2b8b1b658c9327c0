//! Tables regenerated from persisted backtest results.

use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use curvespread::perfstats::{
    conditional_perf, predictive_regression, sharpe_difference_test, spanning, summarize_with, weekday_perf, wealth_curve,
    StatsError,
};
use curvespread::portfolio::{blend, timed_returns, TimingConfig};
use curvespread::{BacktestResult, CostScenario, PerfSummary, RegressionReport, ReturnSeries};

use crate::config::{ReportConfig, SpanningConfig, SERIES};
use crate::error::{io_error, CliError};

const SUMMARY_COLUMNS: [&str; 15] = [
    "observations",
    "ann_mean_geometric",
    "ann_mean_arithmetic",
    "mean_t_stat",
    "ann_volatility",
    "ann_downside_volatility",
    "sharpe",
    "sortino",
    "omega",
    "skewness",
    "excess_kurtosis",
    "var99_cornish_fisher",
    "pct_positive_months",
    "max_drawdown",
    "cer",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn summary_cells(s: &PerfSummary) -> Vec<String> {
    vec![
        s.observations.to_string(),
        num(s.ann_mean_geometric),
        num(s.ann_mean_arithmetic),
        opt(s.mean_t_stat),
        num(s.ann_volatility),
        num(s.ann_downside_volatility),
        opt(s.sharpe),
        opt(s.sortino),
        opt(s.omega),
        opt(s.skewness),
        opt(s.excess_kurtosis),
        num(s.var99_cornish_fisher),
        opt(s.pct_positive_months),
        num(s.max_drawdown),
        num(s.cer),
    ]
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn with_summary(prefix: &[&str]) -> Self {
        let mut t = Self::new(prefix);
        t.header.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
        t
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = self.header.join(",");
        text.push('\n');
        for r in &self.rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| io_error(path, e))
    }
}

pub fn write_series(path: &Path, s: &ReturnSeries) -> Result<(), CliError> {
    let mut t = Table::new(&["date", "value"]);
    for (d, v) in s.iter() {
        t.push(vec![d.to_string(), num(v)]);
    }
    t.write(path)
}

pub fn read_series(path: &Path) -> Result<ReturnSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let bad = |line: usize, what: &str| CliError::Data(format!("{}:{line}: {what}", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some("date,value") {
        return Err(bad(1, "expected header 'date,value'"));
    }
    let mut pairs: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let (d, v) = line.split_once(',').ok_or_else(|| bad(i + 2, "expected two fields"))?;
        let d: NaiveDate = d.parse().map_err(|_| bad(i + 2, "invalid date"))?;
        let v: f64 = v.parse().map_err(|_| bad(i + 2, "invalid value"))?;
        if pairs.last().is_some_and(|(p, _)| *p >= d) {
            return Err(bad(i + 2, "dates must be strictly increasing"));
        }
        pairs.push((d, v));
    }
    Ok(ReturnSeries::from_pairs(pairs))
}

struct Strategy {
    name: String,
    result: BacktestResult,
}

impl Strategy {
    fn series(&self, which: &str) -> ReturnSeries {
        match which {
            "gross" => self.result.gross_series(),
            "net_tc1" => self.result.net_series(CostScenario::Tc1),
            "net_tc2" => self.result.net_series(CostScenario::Tc2),
            _ => self.result.net_series(CostScenario::Tc3),
        }
    }
}

fn load_results(dir: &Path) -> Result<Vec<Strategy>, CliError> {
    let results = dir.join("results");
    let empty = || CliError::Data(format!("report: no results found in {}", results.display()));
    let entries = std::fs::read_dir(&results).map_err(|_| empty())?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(empty());
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let result = BacktestResult::read_csv(p)?;
            if result.len() < 2 {
                return Err(CliError::Data(format!("report: {} has fewer than two rows", p.display())));
            }
            Ok(Strategy { name, result })
        })
        .collect()
}

fn load_config(dir: &Path) -> Result<ReportConfig, CliError> {
    let path = dir.join("report.toml");
    if !path.exists() {
        return Ok(ReportConfig::default());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Inclusive date ranges: the full sample, then the pieces between the cuts.
fn samples(cuts: &[NaiveDate]) -> Vec<(String, Option<NaiveDate>, Option<NaiveDate>)> {
    let mut out = vec![("full".to_string(), None, None)];
    let mut from: Option<NaiveDate> = None;
    for c in cuts.iter().copied().chain(std::iter::once(NaiveDate::MAX)) {
        let to = (c != NaiveDate::MAX).then_some(c);
        let label = format!(
            "{}..{}",
            from.map(|d| d.to_string()).unwrap_or_default(),
            to.map(|d| d.to_string()).unwrap_or_default()
        );
        out.push((label, from, to));
        from = c.checked_add_days(Days::new(1));
    }
    out
}

fn summarize(r: &ReturnSeries, cfg: &ReportConfig) -> Result<PerfSummary, StatsError> {
    summarize_with(r, &cfg.summary_options())
}

fn regression_rows(t: &mut Table, prefix: &[String], rep: &Result<RegressionReport, StatsError>) {
    match rep {
        Ok(rep) => {
            for (i, name) in rep.names.iter().enumerate() {
                let mut row = prefix.to_vec();
                row.extend([
                    name.clone(),
                    num(rep.coefficients[i]),
                    num(rep.std_errors[i]),
                    opt(rep.t_stats[i]),
                    opt(rep.alpha_annualized),
                    num(rep.r_squared),
                    num(rep.adj_r_squared),
                    rep.lag.to_string(),
                    rep.observations.to_string(),
                    if rep.degenerate { "degenerate".into() } else { String::new() },
                ]);
                t.push(row);
            }
        }
        Err(e) => {
            let mut row = prefix.to_vec();
            row.extend(std::iter::repeat_n(String::new(), 9));
            row.push(e.to_string());
            t.push(row);
        }
    }
}

const REGRESSION_COLUMNS: [&str; 10] =
    ["term", "coefficient", "std_error", "t_stat", "alpha_annualized", "r_squared", "adj_r_squared", "lag", "observations", "note"];

fn regression_table(prefix: &[&str]) -> Table {
    let mut t = Table::new(prefix);
    t.header.extend(REGRESSION_COLUMNS.iter().map(|s| s.to_string()));
    t
}

fn default_spanning(names: &[String]) -> Vec<SpanningConfig> {
    if names.len() < 2 {
        return Vec::new();
    }
    names
        .iter()
        .map(|n| SpanningConfig {
            strategy: n.clone(),
            factors: names.iter().filter(|f| *f != n).cloned().collect(),
            frequency: "monthly".into(),
            series: "net_tc1".into(),
        })
        .collect()
}

/// Regenerates every table under `<dir>/report` from `<dir>/results`.
pub fn cmd_report(dir: &Path) -> Result<(), CliError> {
    let cfg = load_config(dir)?;
    let strategies = load_results(dir)?;
    let names: Vec<String> = strategies.iter().map(|s| s.name.clone()).collect();
    let find = |n: &str| -> Result<usize, CliError> {
        names.iter().position(|x| x == n).ok_or_else(|| CliError::Validation(format!("report: unknown strategy '{n}'")))
    };
    let dispersion_path = dir.join("series").join("dispersion.csv");
    let dispersion = if dispersion_path.exists() { Some(read_series(&dispersion_path)?) } else { None };
    let risk_free = cfg.risk_free.as_deref().map(read_series).transpose()?;
    let out = dir.join("report");
    std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;

    // Summary rows: each strategy and each configured blend, gross, full sample.
    let mut blends = Vec::new();
    for [a, b] in &cfg.blends {
        let (ia, ib) = (find(a)?, find(b)?);
        blends.push((format!("{a}+{b}"), ia, ib));
    }
    let blend_series = |which: &str, ia: usize, ib: usize| blend(&strategies[ia].series(which), &strategies[ib].series(which));

    let mut summary = Table::with_summary(&["strategy"]);
    let mut rows: Vec<(String, ReturnSeries)> = strategies.iter().map(|s| (s.name.clone(), s.series("gross"))).collect();
    rows.extend(blends.iter().map(|(n, a, b)| (n.clone(), blend_series("gross", *a, *b))));
    for (name, r) in &rows {
        let s = summarize(r, &cfg).map_err(|e| CliError::Numerical(format!("perfstats [{name}]: {e}")))?;
        let mut row = vec![name.clone()];
        row.extend(summary_cells(&s));
        summary.push(row);
    }
    summary.write(&out.join("summary.csv"))?;

    // Every series over the full sample and each subsample.
    let mut sub = Table::with_summary(&["strategy", "series", "sample"]);
    for which in SERIES {
        let mut all: Vec<(String, ReturnSeries)> = strategies.iter().map(|s| (s.name.clone(), s.series(which))).collect();
        all.extend(blends.iter().map(|(n, a, b)| (n.clone(), blend_series(which, *a, *b))));
        for (name, r) in &all {
            for (label, from, to) in samples(&cfg.subsample_cuts) {
                let mut row = vec![name.clone(), which.to_string(), label];
                match summarize(&r.slice(from, to), &cfg) {
                    Ok(s) => row.extend(summary_cells(&s)),
                    Err(_) => row.extend(std::iter::repeat_n(String::new(), SUMMARY_COLUMNS.len())),
                }
                sub.push(row);
            }
        }
    }
    sub.write(&out.join("subsamples.csv"))?;

    // Turnover and net performance per cost scenario.
    let mut costs = Table::new(&["strategy", "avg_turnover", "max_turnover", "scenario", "ann_mean_arithmetic", "mean_t_stat", "sharpe"]);
    for s in &strategies {
        let to = &s.result.turnover;
        let avg = to.iter().sum::<f64>() / to.len() as f64;
        let max = to.iter().copied().fold(0.0, f64::max);
        for sc in CostScenario::ALL {
            let p = summarize(&s.result.net_series(sc), &cfg)?;
            costs.push(vec![
                s.name.clone(),
                num(avg),
                num(max),
                sc.to_string(),
                num(p.ann_mean_arithmetic),
                opt(p.mean_t_stat),
                opt(p.sharpe),
            ]);
        }
    }
    costs.write(&out.join("turnover.csv"))?;

    // Spanning regressions.
    let specs = if cfg.spanning.is_empty() { default_spanning(&names) } else { cfg.spanning.clone() };
    let mut span = regression_table(&["strategy", "series", "frequency", "factors"]);
    for sp in &specs {
        let y = strategies[find(&sp.strategy)?].series(&sp.series);
        let factors: Vec<(String, ReturnSeries)> =
            sp.factors.iter().map(|f| Ok((f.clone(), strategies[find(f)?].series(&sp.series)))).collect::<Result<_, CliError>>()?;
        let refs: Vec<(&str, &ReturnSeries)> = factors.iter().map(|(n, s)| (n.as_str(), s)).collect();
        let freq = sp.frequency()?;
        let lag = cfg.lag();
        let rep = spanning(&y, &refs, freq, lag);
        let prefix = [sp.strategy.clone(), sp.series.clone(), sp.frequency.clone(), sp.factors.join(";")];
        regression_rows(&mut span, &prefix, &rep);
    }
    span.write(&out.join("spanning.csv"))?;

    // Conditional performance.
    let mut cond = Table::new(&[
        "strategy",
        "series",
        "indicator",
        "threshold",
        "high_days",
        "low_days",
        "high_ann_mean",
        "low_ann_mean",
        "high_sharpe",
        "low_sharpe",
        "difference",
        "t_stat",
        "note",
    ]);
    let mut cond_specs: Vec<(String, String, String)> =
        cfg.conditional.iter().map(|c| (c.strategy.clone(), c.series.clone(), c.indicator.clone())).collect();
    if cond_specs.is_empty() && dispersion.is_some() {
        cond_specs = names.iter().map(|n| (n.clone(), "gross".to_string(), "dispersion".to_string())).collect();
    }
    for (name, which, indicator) in &cond_specs {
        let r = strategies[find(name)?].series(which);
        let x = if indicator == "dispersion" {
            dispersion.clone().ok_or_else(|| CliError::Data("report: dispersion series not found".into()))?
        } else {
            read_series(Path::new(indicator))?
        };
        let label = Path::new(indicator).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut row = vec![name.clone(), which.clone(), label];
        match conditional_perf(&r, &x) {
            Ok(c) => row.extend([
                num(c.threshold),
                c.high_days.to_string(),
                c.low_days.to_string(),
                opt(c.high.as_ref().map(|s| s.ann_mean_arithmetic)),
                opt(c.low.as_ref().map(|s| s.ann_mean_arithmetic)),
                opt(c.high.as_ref().and_then(|s| s.sharpe)),
                opt(c.low.as_ref().and_then(|s| s.sharpe)),
                opt(c.difference),
                opt(c.t_stat),
                if c.one_sided { "one-sided".into() } else { String::new() },
            ]),
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(e.to_string());
            }
        }
        cond.push(row);
    }
    cond.write(&out.join("conditional.csv"))?;

    if cfg.weekday {
        let mut wd = Table::new(&["strategy", "series", "weekday", "observations", "ann_mean", "t_stat"]);
        for s in &strategies {
            for w in weekday_perf(&s.series("gross")) {
                wd.push(vec![
                    s.name.clone(),
                    "gross".into(),
                    w.weekday.to_string(),
                    w.observations.to_string(),
                    num(w.ann_mean),
                    opt(w.t_stat),
                ]);
            }
        }
        wd.write(&out.join("weekday.csv"))?;
    }

    let mut wealth = Table::new(&["strategy", "series", "date", "wealth"]);
    for s in &strategies {
        for which in ["gross", "net_tc1"] {
            for (d, v) in wealth_curve(&s.series(which), risk_free.as_ref()).iter() {
                wealth.push(vec![s.name.clone(), which.into(), d.to_string(), num(v)]);
            }
        }
    }
    wealth.write(&out.join("wealth.csv"))?;

    if let Some(disp) = &dispersion {
        write_timing(&out, &cfg, &strategies, &names, disp)?;
    }
    Ok(())
}

fn write_timing(out: &Path, cfg: &ReportConfig, strategies: &[Strategy], names: &[String], disp: &ReturnSeries) -> Result<(), CliError> {
    let target = match &cfg.timing.strategy {
        Some(n) => names.iter().position(|x| x == n),
        None => names.iter().position(|x| x == "S"),
    };
    let calibration = cfg.calibration()?;

    let mut pred = regression_table(&["strategy", "series", "predictor"]);
    for s in strategies.iter() {
        for which in ["gross", "net_tc1"] {
            let rep = predictive_regression(&s.series(which), disp, cfg.lag());
            regression_rows(&mut pred, &[s.name.clone(), which.into(), "dispersion".into()], &rep);
        }
    }
    pred.write(&out.join("predictive.csv"))?;

    let mut timing = Table::with_summary(&["strategy", "series", "window", "scale", "note"]);
    let mut leverage = Table::new(&["strategy", "window", "date", "leverage"]);
    let mut tests = Table::new(&["strategy", "series", "window", "sharpe_timed", "sharpe_base", "statistic", "p_value", "paired", "note"]);
    if let Some(i) = target {
        let name = strategies[i].name.clone();
        for which in SERIES {
            let base = strategies[i].series(which);
            let mut row = vec![name.clone(), which.to_string(), "base".into(), String::new(), String::new()];
            row.extend(summary_cells(&summarize(&base, cfg)?));
            timing.push(row);
            for &w in &cfg.timing.windows {
                let mut row = vec![name.clone(), which.to_string(), w.to_string()];
                let mut test = vec![name.clone(), which.to_string(), w.to_string()];
                let timed = timed_returns(&base, disp, TimingConfig { window: w, calibration });
                match timed.as_ref().map_err(|e| e.to_string()).and_then(|t| {
                    summarize(&t.returns, cfg).map(|s| (t, s)).map_err(|e| e.to_string())
                }) {
                    Ok((t, s)) => {
                        row.extend([num(t.scale), String::new()]);
                        row.extend(summary_cells(&s));
                        if which == "gross" {
                            for (d, v) in t.leverage.iter() {
                                leverage.push(vec![name.clone(), w.to_string(), d.to_string(), num(v)]);
                            }
                        }
                        match sharpe_difference_test(&t.returns, &base) {
                            Ok(st) => test.extend([
                                num(st.sharpe_a),
                                num(st.sharpe_b),
                                num(st.statistic),
                                num(st.p_value),
                                st.paired.to_string(),
                                String::new(),
                            ]),
                            Err(e) => {
                                test.extend(std::iter::repeat_n(String::new(), 5));
                                test.push(e.to_string());
                            }
                        }
                    }
                    Err(e) => {
                        row.extend([String::new(), e.clone()]);
                        row.extend(std::iter::repeat_n(String::new(), SUMMARY_COLUMNS.len()));
                        test.extend(std::iter::repeat_n(String::new(), 5));
                        test.push(e);
                    }
                }
                timing.push(row);
                tests.push(test);
            }
        }
    }
    timing.write(&out.join("timing.csv"))?;
    leverage.write(&out.join("leverage.csv"))?;
    tests.write(&out.join("sharpe_tests.csv"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn subsample_ranges_partition_the_calendar() {
        let s = samples(&[d(2000, 12, 31), d(2009, 3, 31)]);
        assert_eq!(s.len(), 4);
        assert_eq!(s[1], ("..2000-12-31".into(), None, Some(d(2000, 12, 31))));
        assert_eq!(s[2].1, Some(d(2001, 1, 1)));
        assert_eq!(s[3], ("2009-04-01..".into(), Some(d(2009, 4, 1)), None));
    }

    #[test]
    fn series_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = ReturnSeries::new(vec![d(2020, 1, 2), d(2020, 1, 3)], vec![0.1, -1e-17]);
        write_series(&path, &s).unwrap();
        assert_eq!(read_series(&path).unwrap(), s);
    }

    #[test]
    fn empty_results_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("results")).unwrap();
        assert!(matches!(cmd_report(dir.path()), Err(CliError::Data(_))));
    }
}
