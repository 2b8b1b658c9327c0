//! Weight books for the curve strategies, naive benchmarks and characteristic
//! factor portfolios, plus the dispersion-timing overlay and sleeve blending.

mod blend;
mod books;
mod timing;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::marketdata::MarketDataError;
use crate::signals::Characteristic;

pub use blend::blend;
pub use books::{availability, build_book, build_cs_book, build_factor_book, build_naive_book, build_ts_book};
pub use timing::{dispersion, dispersion_series, timed_returns, Calibration, TimedReturns, TimingConfig, TimingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Leg {
    Long,
    Short,
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::Long => "long",
            Leg::Short => "short",
        })
    }
}

/// One contract-level weight. `location` is the 1-based curve position.
#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    pub commodity: String,
    pub location: usize,
    pub weight: f64,
    pub leg: Leg,
}

/// Target weights set at the close of one date.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BookDay {
    pub positions: Vec<Position>,
    /// Only one leg populated; the other half of capital sits in cash.
    pub degenerate: bool,
}

impl BookDay {
    pub fn gross(&self) -> f64 {
        self.positions.iter().map(|p| p.weight.abs()).sum()
    }

    pub fn leg_gross(&self, leg: Leg) -> f64 {
        self.positions.iter().filter(|p| p.leg == leg).map(|p| p.weight.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rebalance {
    Daily,
    /// Targets are set on month-end dates and drift in between.
    Monthly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightBook {
    pub rebalance: Rebalance,
    pub days: BTreeMap<NaiveDate, BookDay>,
}

impl WeightBook {
    pub fn new(rebalance: Rebalance) -> Self {
        Self { rebalance, days: BTreeMap::new() }
    }

    pub fn get(&self, date: NaiveDate) -> Option<&BookDay> {
        self.days.get(&date)
    }

    pub fn max_location(&self) -> usize {
        self.days.values().flat_map(|d| d.positions.iter().map(|p| p.location)).max().unwrap_or(1)
    }

    /// Keeps only positions whose commodity passes `keep`; legs are not rebuilt.
    pub fn restrict(&self, keep: impl Fn(&str) -> bool) -> Self {
        let days = self
            .days
            .iter()
            .map(|(d, day)| {
                let positions = day.positions.iter().filter(|p| keep(&p.commodity)).cloned().collect();
                (*d, BookDay { positions, degenerate: day.degenerate })
            })
            .collect();
        Self { rebalance: self.rebalance, days }
    }

    /// `date,commodity,location,weight,leg`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "date,commodity,location,weight,leg")?;
        for (d, day) in &self.days {
            for p in &day.positions {
                writeln!(out, "{d},{},{},{},{}", p.commodity, p.location, p.weight, p.leg)?;
            }
        }
        out.flush()
    }

    /// Reads the [`write_csv`](Self::write_csv) layout. Degenerate flags are
    /// not persisted and come back false.
    pub fn read_csv(path: impl AsRef<Path>, rebalance: Rebalance) -> Result<Self, MarketDataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MarketDataError::Io { path: path.to_path_buf(), source: e })?;
        let err = |line: usize, message: String| MarketDataError::Parse { path: path.display().to_string(), line: line as u64, message };
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "date,commodity,location,weight,leg" {
            return Err(err(1, format!("unexpected header '{header}'")));
        }
        let mut book = Self::new(rebalance);
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(err(i + 2, format!("expected 5 fields, found {}", f.len())));
            }
            let date: NaiveDate = f[0].parse().map_err(|e| err(i + 2, format!("bad date '{}': {e}", f[0])))?;
            let location: usize = f[2].parse().map_err(|_| err(i + 2, format!("bad location '{}'", f[2])))?;
            let weight: f64 = f[3].parse().map_err(|_| err(i + 2, format!("bad weight '{}'", f[3])))?;
            let leg = match f[4] {
                "long" => Leg::Long,
                "short" => Leg::Short,
                other => return Err(err(i + 2, format!("bad leg '{other}'"))),
            };
            if location == 0 || !weight.is_finite() {
                return Err(err(i + 2, "location must be positive and weight finite".into()));
            }
            book.days.entry(date).or_default().positions.push(Position { commodity: f[1].to_string(), location, weight, leg });
        }
        Ok(book)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveKind {
    /// Long fronts, rebalanced daily.
    Lavg,
    /// Long slope spreads.
    Savg,
    /// Long butterflies.
    Cavg,
    /// Long fronts, rebalanced monthly.
    Avg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Level,
    Slope,
    Curvature,
    Naive(NaiveKind),
    Factor(Characteristic),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Level => write!(f, "L"),
            Family::Slope => write!(f, "S"),
            Family::Curvature => write!(f, "C"),
            Family::Naive(NaiveKind::Lavg) => write!(f, "LAVG"),
            Family::Naive(NaiveKind::Savg) => write!(f, "SAVG"),
            Family::Naive(NaiveKind::Cavg) => write!(f, "CAVG"),
            Family::Naive(NaiveKind::Avg) => write!(f, "AVG"),
            Family::Factor(c) => write!(f, "{}", c.to_string().to_uppercase()),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "L" => Family::Level,
            "S" => Family::Slope,
            "C" => Family::Curvature,
            "LAVG" => Family::Naive(NaiveKind::Lavg),
            "SAVG" => Family::Naive(NaiveKind::Savg),
            "CAVG" => Family::Naive(NaiveKind::Cavg),
            "AVG" => Family::Naive(NaiveKind::Avg),
            _ => Family::Factor(s.to_ascii_lowercase().parse().map_err(|_| format!("unknown strategy family '{s}'"))?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    CrossSectional,
    TimeSeries,
}

/// Contract legs traded per unit of commodity capital.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Front contract.
    Outright,
    /// Front against location `far` (4 by default).
    Slope { far: usize },
    /// Second contract twice against front and fourth.
    Butterfly,
}

impl Geometry {
    /// `(location, weight)` for one unit of long capital; absolute weights sum to 1.
    pub fn template(self) -> Vec<(usize, f64)> {
        match self {
            Geometry::Outright => vec![(1, 1.0)],
            Geometry::Slope { far } => vec![(1, 0.5), (far, -0.5)],
            Geometry::Butterfly => vec![(1, -0.25), (2, 0.5), (4, -0.25)],
        }
    }

    pub fn is_spread(self) -> bool {
        !matches!(self, Geometry::Outright)
    }

    pub fn depth(self) -> usize {
        match self {
            Geometry::Outright => 1,
            Geometry::Slope { far } => far,
            Geometry::Butterfly => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategySpec {
    pub family: Family,
    pub mode: Mode,
    pub geometry: Geometry,
    pub rebalance: Rebalance,
}

impl StrategySpec {
    /// Default geometry and rebalancing for a family, cross-sectional mode.
    pub fn new(family: Family) -> Self {
        let (geometry, rebalance) = match family {
            Family::Level | Family::Naive(NaiveKind::Lavg) => (Geometry::Outright, Rebalance::Daily),
            Family::Slope | Family::Naive(NaiveKind::Savg) => (Geometry::Slope { far: 4 }, Rebalance::Daily),
            Family::Curvature | Family::Naive(NaiveKind::Cavg) => (Geometry::Butterfly, Rebalance::Daily),
            Family::Naive(NaiveKind::Avg) | Family::Factor(_) => (Geometry::Outright, Rebalance::Monthly),
        };
        Self { family, mode: Mode::CrossSectional, geometry, rebalance }
    }

    pub fn time_series(mut self) -> Self {
        self.mode = Mode::TimeSeries;
        self
    }

    pub fn with_far_location(mut self, far: usize) -> Self {
        if let Geometry::Slope { .. } = self.geometry {
            self.geometry = Geometry::Slope { far };
        }
        self
    }

    /// Checks geometry/family/rebalance consistency.
    pub fn validate(&self) -> Result<(), String> {
        let expected = StrategySpec::new(self.family);
        let geometry_ok = match (self.geometry, expected.geometry) {
            (Geometry::Slope { far }, Geometry::Slope { .. }) => matches!(far, 4 | 6 | 12),
            (a, b) => a == b,
        };
        if !geometry_ok {
            return Err(format!("geometry {:?} does not match family {}", self.geometry, self.family));
        }
        if self.rebalance != expected.rebalance {
            return Err(format!("family {} rebalances {:?}", self.family, expected.rebalance));
        }
        if self.mode == Mode::TimeSeries && !matches!(self.family, Family::Level | Family::Slope | Family::Curvature) {
            return Err(format!("time-series mode applies to L/S/C only, not {}", self.family));
        }
        Ok(())
    }
}
