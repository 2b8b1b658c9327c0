//! Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use chrono::NaiveDate;
use curvespread::backtest::{evaluate, CostModel, Pipeline, SignalOptions, UniverseFilter};
use curvespread::backtest::Market;
use curvespread::calendar::business_days;
use curvespread::marketdata::{load_chains_dir, simulate_market, SimConfig, SpecTable};
use curvespread::nscurve::{
    curvature_loading, decay_factor, fit_ns_seasonal, fit_snapshots, slope_loading, ComponentSet, SeasonalSelection,
    SEASONAL_OMEGA,
};
use curvespread::perfstats::{
    certainty_equivalent, cornish_fisher_var, nw_regression, spanning, summarize, Frequency, Lag,
};
use curvespread::portfolio::{timed_returns, Calibration, Family, Leg, Mode, Rebalance, StrategySpec, TimingConfig, WeightBook};
use curvespread::{BacktestResult, CostScenario, CurveSnapshot, ReturnSeries};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const NS_RECOVERY_REL: f64 = 1e-9;
const R2_ONE: f64 = 1e-12;
const NS_RUNTIME_S: f64 = 10.0;
const DECAY_ROOT: f64 = 1e-10;
const DECAY_BUMP: f64 = 1e-4;
const NESTING_SLACK: f64 = 1e-12;
const SEASONAL_BETA_REL: f64 = 1e-9;
const BOOK_TOL: f64 = 1e-12;
/// Rounding slack on the upper turnover bound of 2.
const TURNOVER_SLACK: f64 = 1e-12;
const LEDGER_TOL: f64 = 1e-12;
const CER_TOL: f64 = 1e-10;
const OMEGA_TOL: f64 = 1e-12;
const WHITE_TOL: f64 = 1e-12;
const HAC_FIXTURE_REL: f64 = 1e-10;
const TIMING_SD_REL: f64 = 1e-10;
const TIMING_SCALE_REL: f64 = 1e-12;
const SELF_SPAN_TOL: f64 = 1e-10;
const E2E_SEEDS: u64 = 20;
const E2E_DAYS: usize = 10_000;
const E2E_PERSISTENCE: f64 = 0.3;
const E2E_MIN_SHARE: f64 = 0.95;
const E2E_T: f64 = 2.0;
const E2E_RUNTIME_S: f64 = 120.0;

/// Direct evaluation of `252·((1.001)^{−4} − 1)/(−4)`.
const CER_DIRECT: f64 = 0.251_371_257_798_522_7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn core_fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut cfg = SimConfig::reference(start(), 500, 0.3);
    for c in &mut cfg.commodities {
        c.noise_sd = 0.0;
        c.seasonal_amplitude = 0.0;
    }
    let m = simulate_market(&cfg, 1).unwrap();
    let market = Market { chains: m.chains.clone(), cot: m.cot.clone() };
    let pipeline = Pipeline::new(&market, &UniverseFilter::default()).unwrap();
    let fits = pipeline.fits(4, &SeasonalSelection::None).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let (mut worst, mut worst_r2, mut n, mut missing) = (0.0f64, 0.0f64, 0usize, 0usize);
    for t in &m.truth {
        match fits.get(&t.commodity_id, t.date) {
            Some(p) => {
                n += 1;
                let f = &p.fit;
                worst = worst
                    .max(rel(f.beta_level, t.beta_level))
                    .max(rel(f.beta_slope, t.beta_slope))
                    .max(rel(f.beta_curvature, t.beta_curvature));
                worst_r2 = worst_r2.max((1.0 - f.r_squared).abs());
            }
            None => missing += 1,
        }
    }
    outcome(
        worst <= NS_RECOVERY_REL && worst_r2 <= R2_ONE && n >= 10_000 && missing == 0 && elapsed < NS_RUNTIME_S,
        format!("{n} commodity-days, max rel err {worst:.2e}, max |1-R2| {worst_r2:.1e}, {missing} unfitted, {elapsed:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut bumps_up) = (0.0f64, 0usize);
    for _ in 0..100 {
        let m: f64 = rng.random_range(0.5..24.0);
        let lambda = decay_factor(m).unwrap();
        let x = lambda * m;
        worst = worst.max(((-x).exp() * (1.0 + x + x * x) - 1.0).abs());
        let peak = curvature_loading(lambda, m);
        for l in [lambda - DECAY_BUMP, lambda + DECAY_BUMP] {
            if curvature_loading(l, m) > peak {
                bumps_up += 1;
            }
        }
    }
    outcome(worst <= DECAY_ROOT && bumps_up == 0, format!("max root residual {worst:.1e}, {bumps_up} bumps raised the loading"))
}

fn criterion_3() -> Outcome {
    let cfg = SimConfig::reference(start(), 400, 0.3);
    let m = simulate_market(&cfg, 3).unwrap();
    let market = Market { chains: m.chains, cot: m.cot };
    let pipeline = Pipeline::new(&market, &UniverseFilter::default()).unwrap();
    let snaps = pipeline.snapshots(4).unwrap();
    let none = SeasonalSelection::None;
    let full = fit_snapshots(&snaps, ComponentSet::full(), &none);
    let ls = fit_snapshots(&snaps, ComponentSet::level_slope(), &none);
    let lc = fit_snapshots(&snaps, ComponentSet::level_curvature(), &none);
    let (mut n, mut bad, mut sum) = (0usize, 0usize, [0.0f64; 3]);
    for (id, days) in &full.fits {
        for (d, f) in days {
            let (a, b) = (ls.get(id, *d).unwrap().fit.r_squared, lc.get(id, *d).unwrap().fit.r_squared);
            let r = f.fit.r_squared;
            n += 1;
            sum[0] += r;
            sum[1] += a;
            sum[2] += b;
            if r < a - NESTING_SLACK || r < b - NESTING_SLACK {
                bad += 1;
            }
        }
    }
    let k = n as f64;
    outcome(
        bad == 0 && n > 0,
        format!(
            "{n} snapshots, {bad} violations; mean R2 full {:.4}, L+S {:.4}, L+C {:.4}",
            sum[0] / k,
            sum[1] / k,
            sum[2] / k
        ),
    )
}

fn criterion_4() -> Outcome {
    let maturities: Vec<f64> = (0..12).map(|i| 0.6 + i as f64).collect();
    let lambda = decay_factor(maturities.iter().sum::<f64>() / 12.0).unwrap();
    let (mut wrong_theta, mut worst) = (0usize, 0.0f64);
    for theta in 1..=12u32 {
        let beta_se = 0.8 + 0.1 * theta as f64;
        let prices: Vec<f64> = maturities
            .iter()
            .map(|m| {
                60.0 - 4.0 * slope_loading(lambda, *m)
                    + 2.5 * curvature_loading(lambda, *m)
                    + beta_se * (SEASONAL_OMEGA * (m - theta as f64)).cos()
            })
            .collect();
        let snap = CurveSnapshot::from_curve(start(), "x", &maturities, &prices);
        let fit = fit_ns_seasonal(&snap).unwrap();
        if fit.theta != theta {
            wrong_theta += 1;
        }
        worst = worst.max(rel(fit.beta_seasonal, beta_se));
    }
    outcome(wrong_theta == 0 && worst <= SEASONAL_BETA_REL, format!("{wrong_theta} phases missed, max rel beta_SE err {worst:.1e}"))
}

/// A 1500-day simulated market shared by criteria 5, 7, 9 and 10.
struct Shared {
    pipeline: Pipeline,
    results: BTreeMap<String, (StrategySpec, WeightBook, BacktestResult)>,
    dispersion: ReturnSeries,
}

fn shared() -> Shared {
    let cfg = SimConfig::reference(start(), 1500, 0.3);
    let m = simulate_market(&cfg, 5).unwrap();
    let market = Market { chains: m.chains, cot: m.cot };
    let pipeline = Pipeline::new(&market, &UniverseFilter::default()).unwrap();
    let options = SignalOptions::default();
    let fits = pipeline.fits(4, &SeasonalSelection::None).unwrap();
    let mut results = BTreeMap::new();
    for family in [Family::Level, Family::Slope, Family::Curvature] {
        for spec in [StrategySpec::new(family), StrategySpec::new(family).time_series()] {
            let signal = pipeline.signal(&spec, &options, Some(&fits)).unwrap();
            let book = pipeline.book(&spec, signal.as_ref()).unwrap();
            let result = pipeline.evaluate(&spec, &book, &CostModel::default()).unwrap();
            let mode = if spec.mode == Mode::TimeSeries { "ts" } else { "cs" };
            results.insert(format!("{family}-{mode}"), (spec, book, result));
        }
    }
    let dispersion = curvespread::portfolio::dispersion_series(&fits);
    Shared { pipeline, results, dispersion }
}

fn criterion_5(s: &Shared) -> Outcome {
    let (mut days, mut bad_gross, mut bad_leg, mut bad_ts, mut max_to) = (0usize, 0usize, 0usize, 0usize, 0.0f64);
    let mut neg_to = 0usize;
    for (spec, book, result) in s.results.values() {
        for day in book.days.values().filter(|d| !d.degenerate && !d.positions.is_empty()) {
            days += 1;
            if (day.gross() - 1.0).abs() > BOOK_TOL {
                bad_gross += 1;
            }
            match spec.mode {
                Mode::CrossSectional => {
                    let long: f64 = day.positions.iter().filter(|p| p.leg == Leg::Long).map(|p| p.weight).sum();
                    let short: f64 = day.positions.iter().filter(|p| p.leg == Leg::Short).map(|p| p.weight).sum();
                    let legs_ok = (day.leg_gross(Leg::Long) - 0.5).abs() <= BOOK_TOL
                        && (day.leg_gross(Leg::Short) - 0.5).abs() <= BOOK_TOL;
                    // outright legs also net to ±0.5; spread legs are self-financing
                    let net_ok = spec.family != Family::Level
                        || ((long - 0.5).abs() <= BOOK_TOL && (short + 0.5).abs() <= BOOK_TOL);
                    if !legs_ok || !net_ok {
                        bad_leg += 1;
                    }
                }
                Mode::TimeSeries => {
                    let n: std::collections::BTreeSet<&str> = day.positions.iter().map(|p| p.commodity.as_str()).collect();
                    let n = n.len() as f64;
                    for p in &day.positions {
                        let want = match (spec.family, p.location) {
                            (Family::Level, _) => 1.0 / n,
                            (Family::Slope, _) => 1.0 / (2.0 * n),
                            (_, 2) => 1.0 / (2.0 * n),
                            _ => 1.0 / (4.0 * n),
                        };
                        if (p.weight.abs() - want).abs() > BOOK_TOL {
                            bad_ts += 1;
                        }
                    }
                }
            }
        }
        for t in &result.turnover {
            max_to = max_to.max(*t);
            if *t < 0.0 {
                neg_to += 1;
            }
        }
    }
    outcome(
        bad_gross + bad_leg + bad_ts + neg_to == 0 && max_to <= 2.0 + TURNOVER_SLACK && days > 0,
        format!(
            "{days} book-days over 6 strategies; violations: gross {bad_gross}, legs {bad_leg}, ts magnitudes {bad_ts}; TO in [0, {max_to}]"
        ),
    )
}

fn criterion_6() -> Outcome {
    let dir = core_fixtures().join("ledger");
    let specs = SpecTable::load(dir.join("specs.toml")).unwrap();
    let chains = load_chains_dir(dir.join("prices"), &specs).unwrap();
    let book = WeightBook::read_csv(dir.join("book.csv"), Rebalance::Daily).unwrap();
    let calendar = chains[0].calendar();
    let text = std::fs::read_to_string(dir.join("expected.csv")).unwrap();
    let (mut worst, mut rows, mut rolls) = (0.0f64, 0usize, 0usize);
    for (drift, name) in [
        (curvespread::backtest::DriftConvention::GrossPreserving, "gross_preserving"),
        (curvespread::backtest::DriftConvention::Raw, "raw"),
    ] {
        let costs = CostModel { drift, ..CostModel::default() };
        let r = evaluate(&book, &chains, &calendar, &costs, false).unwrap();
        rolls += r.flags.iter().filter(|f| f.roll).count();
        for (i, line) in text.lines().skip(1).filter(|l| l.starts_with(&format!("{name},"))).enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(r.dates[i].to_string(), f[1]);
            let want: Vec<f64> = f[2..].iter().map(|x| x.parse().unwrap()).collect();
            let got = [r.gross[i], r.turnover[i], r.net[0][i], r.net[1][i], r.net[2][i]];
            for (g, w) in got.iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
            rows += 1;
        }
    }
    outcome(
        worst <= LEDGER_TOL && rows == 10 && rolls == 2,
        format!("{rows} ledger rows under both drift conventions, max abs err {worst:.1e}, {} roll day(s) each", rolls / 2),
    )
}

fn criterion_7(s: &Shared) -> Outcome {
    let (spec, book, costed) = &s.results["S-cs"];
    let free = s.pipeline.evaluate(spec, book, &CostModel::free()).unwrap();
    let zero_ok = CostScenario::ALL.iter().all(|sc| free.net_series(*sc).values == free.gross);
    let mut nesting = 0usize;
    for (_, _, r) in s.results.values() {
        nesting += (0..r.len()).filter(|&i| r.net[2][i] > r.net[0][i]).count();
    }
    let model = CostModel::default();
    let tc2 = specs_sample().iter().all(|(spec, price)| model.unit_cost(CostScenario::Tc2, spec, *price) == 0.000167);
    let drag = costed.gross.iter().zip(&costed.net[1]).map(|(g, n)| g - n).sum::<f64>();
    outcome(
        zero_ok && nesting == 0 && tc2,
        format!("zero-cost net == gross: {zero_ok}; TC3 > TC1 net on {nesting} days; TC2 unit cost exactly 0.0167%: {tc2}; S TC2 total drag {drag:.4}"),
    )
}

fn specs_sample() -> Vec<(curvespread::CommoditySpec, f64)> {
    let table = curvespread::marketdata::universe::reference_specs();
    table.0.values().map(|s| (s.clone(), 37.5)).collect()
}

fn criterion_8() -> Outcome {
    let mut cf_exact = true;
    for (mu, sigma) in [(0.0, 0.01), (0.0004, 0.013), (-0.0011, 0.02), (0.003, 0.0)] {
        if cornish_fisher_var(mu, sigma, 0.0, 0.0) != 2.32635 * sigma - mu {
            cf_exact = false;
        }
    }
    let cer = certainty_equivalent(&[0.001; 252], 5.0, 252.0);
    let cer_ok = (cer - CER_DIRECT).abs() <= CER_TOL;

    let dates = business_days(start(), 400);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mags: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..0.02)).collect();
    let sym: Vec<f64> = mags.iter().flat_map(|m| [*m, -*m]).collect();
    let omega = summarize(&ReturnSeries::new(dates, sym)).unwrap().omega.unwrap();
    let omega_ok = (omega - 1.0).abs() <= OMEGA_TOL;

    let x: Vec<f64> = (0..80).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.2 + 0.5 * v + rng.random_range(-0.3..0.3) * (1.0 + v * v)).collect();
    let rep = nw_regression(&y, &[("x", &x)], true, Lag::Fixed(0), 252.0).unwrap();
    let xm = DMatrix::from_fn(80, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let q = (xm.transpose() * &xm).try_inverse().unwrap();
    let meat = (0..80).fold(DMatrix::zeros(2, 2), |acc, i| {
        let r = xm.row(i).transpose();
        acc + &r * r.transpose() * rep.residuals[i].powi(2)
    });
    let white_err = (&q * meat * &q - &rep.covariance).abs().max();

    let text = std::fs::read_to_string(core_fixtures().join("hac.toml")).unwrap();
    let fx: toml::Table = toml::from_str(&text).unwrap();
    let arr = |k: &str| -> Vec<f64> { fx[k].as_array().unwrap().iter().map(|v| v.as_float().unwrap()).collect() };
    let lag = fx["lag"].as_integer().unwrap() as usize;
    let (fy, fx1, fx2) = (arr("y"), arr("x1"), arr("x2"));
    let hac = nw_regression(&fy, &[("x1", &fx1), ("x2", &fx2)], true, Lag::Fixed(lag), 252.0).unwrap();
    let hac_err = hac
        .coefficients
        .iter()
        .zip(arr("coefficients"))
        .chain(hac.std_errors.iter().zip(arr("std_errors")))
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max);

    outcome(
        cf_exact && cer_ok && omega_ok && white_err <= WHITE_TOL && hac_err <= HAC_FIXTURE_REL,
        format!(
            "CF exact {cf_exact}; CER {cer:.10} (direct {CER_DIRECT:.10}; the quoted 0.25112 is off by {:.1e}); Omega {omega}; White err {white_err:.1e}; 8-point HAC rel err {hac_err:.1e}",
            CER_DIRECT - 0.25112
        ),
    )
}

fn criterion_9(s: &Shared) -> Outcome {
    let base = s.results["S-cs"].2.gross_series();
    let constant = ReturnSeries::new(s.dispersion.dates.clone(), vec![0.037; s.dispersion.len()]);
    let (mut const_err, mut sd_err, mut scale_err) = (0.0f64, 0.0f64, 0.0f64);
    for w in [3, 5, 10, 15, 22] {
        let cfg = TimingConfig { window: w, calibration: Calibration::FullSample };
        let flat = timed_returns(&base, &constant, cfg).unwrap();
        let orig = base.as_map();
        for (d, v) in flat.returns.iter() {
            const_err = const_err.max((v - orig[&d]).abs());
        }
        let timed = timed_returns(&base, &s.dispersion, cfg).unwrap();
        let matched: Vec<f64> = timed.returns.dates.iter().map(|d| orig[d]).collect();
        sd_err = sd_err.max(rel(sample_sd(&timed.returns.values), sample_sd(&matched)));
        for k in [1e-3, 0.37, 12.0, 5e4] {
            let scaled = ReturnSeries::new(s.dispersion.dates.clone(), s.dispersion.values.iter().map(|v| v * k).collect());
            let again = timed_returns(&base, &scaled, cfg).unwrap();
            for (a, b) in again.returns.values.iter().zip(&timed.returns.values) {
                scale_err = scale_err.max(if a == b { 0.0 } else { (a - b).abs() / b.abs().max(f64::MIN_POSITIVE) });
            }
        }
    }
    outcome(
        const_err == 0.0 && sd_err <= TIMING_SD_REL && scale_err <= TIMING_SCALE_REL,
        format!("constant dispersion max diff {const_err:.1e}; sd rel err {sd_err:.1e}; rescaling rel err {scale_err:.1e}"),
    )
}

fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn criterion_10(s: &Shared) -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (_, _, r) in s.results.values() {
        for series in [r.gross_series(), r.net_series(CostScenario::Tc1)] {
            for freq in [Frequency::Daily, Frequency::Monthly] {
                let rep = spanning(&series, &[("self", &series)], freq, Lag::Auto).unwrap();
                worst = worst.max(rep.coefficients[0].abs()).max((rep.coefficients[1] - 1.0).abs());
                cases += 1;
            }
        }
    }
    outcome(worst <= SELF_SPAN_TOL, format!("{cases} self-regressions, max |alpha|, |beta-1| = {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let t0 = Instant::now();
    let spec = StrategySpec::new(Family::Slope);
    let mut t_stats = Vec::new();
    for seed in 0..E2E_SEEDS {
        let cfg = SimConfig::reference(start(), E2E_DAYS, E2E_PERSISTENCE);
        let m = simulate_market(&cfg, 1000 + seed).unwrap();
        let market = Market { chains: m.chains, cot: m.cot };
        let pipeline = Pipeline::new(&market, &UniverseFilter::default()).unwrap();
        let signal = pipeline.signal(&spec, &SignalOptions::default(), None).unwrap();
        let book = pipeline.book(&spec, signal.as_ref()).unwrap();
        let r = pipeline.evaluate(&spec, &book, &CostModel::default()).unwrap();
        let s = summarize(&r.gross_series()).unwrap();
        t_stats.push(if s.ann_mean_arithmetic > 0.0 { s.mean_t_stat.unwrap_or(0.0) } else { f64::NEG_INFINITY });
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let hits = t_stats.iter().filter(|t| **t > E2E_T).count();
    let share = hits as f64 / E2E_SEEDS as f64;
    let min = t_stats.iter().copied().fold(f64::INFINITY, f64::min);
    let median = {
        let mut v = t_stats.clone();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    outcome(
        share >= E2E_MIN_SHARE && elapsed < E2E_RUNTIME_S,
        format!("{hits}/{E2E_SEEDS} seeds with positive mean and NW t > {E2E_T} (min t {min:.1}, median {median:.1}); {elapsed:.1} s"),
    )
}

fn snapshot_dir(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn criterion_12() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        r#"seed = 12
[data.simulate]
start = "2004-01-02"
days = 700
[[strategies]]
family = "L"
[[strategies]]
family = "S"
[[strategies]]
family = "C"
[[strategies]]
name = "S_ts"
family = "S"
mode = "time-series"
[[strategies]]
family = "MOM"
[report]
blends = [["S", "MOM"]]
"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_curvespread");
    let mut snaps = Vec::new();
    for (i, threads) in [1, 1, 4, 8].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let status = Command::new(bin)
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--threads", &threads.to_string()])
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("run with {threads} threads exited with {status}"));
        }
        snaps.push(snapshot_dir(&out));
    }
    let files = snaps[0].len();
    let identical = snaps.iter().all(|s| *s == snaps[0]);
    outcome(identical && files > 10, format!("{files} files byte-identical across two runs at 1 thread and runs at 4 and 8: {identical}"))
}

fn main() {
    let mut failures = Vec::new();
    let mut line = |id: u8, name: &str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())))));
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {id:>2} {name}: {} ({:.1} s)", o.detail, t0.elapsed().as_secs_f64());
        if !o.pass {
            failures.push(id);
        }
    };
    line(1, "exact NS recovery", &criterion_1);
    line(2, "decay root", &criterion_2);
    line(3, "restricted-fit nesting", &criterion_3);
    line(4, "seasonal recovery", &criterion_4);
    let shared = shared();
    line(5, "book invariants", &|| criterion_5(&shared));
    line(6, "ledger oracle", &criterion_6);
    line(7, "cost identities", &|| criterion_7(&shared));
    line(8, "statistics oracles", &criterion_8);
    line(9, "timing identities", &|| criterion_9(&shared));
    line(10, "self-spanning", &|| criterion_10(&shared));
    line(11, "end-to-end slope continuation", &criterion_11);
    line(12, "determinism across runs and threads", &criterion_12);
    if failures.is_empty() {
        println!("acceptance: 12/12 criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
