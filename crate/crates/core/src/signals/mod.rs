//! Dated per-commodity signal panels.

mod alternative;
mod characteristics;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

pub use alternative::{pca_slope, roll_yield, slope_diff, EIGEN_GAP_TOL};
pub use characteristics::{characteristic, Characteristic, CharacteristicParams};

use crate::nscurve::FitPanel;

/// What a panel measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalKind {
    DeltaLevel,
    DeltaSlope,
    DeltaCurvature,
    SlopeDiff,
    Pc2,
    RollYield(usize),
    Factor(Characteristic),
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::DeltaLevel => write!(f, "dbeta_l"),
            SignalKind::DeltaSlope => write!(f, "dbeta_s"),
            SignalKind::DeltaCurvature => write!(f, "dbeta_c"),
            SignalKind::SlopeDiff => write!(f, "dslope"),
            SignalKind::Pc2 => write!(f, "dpc2"),
            SignalKind::RollYield(k) => write!(f, "ry{k}"),
            SignalKind::Factor(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dbeta_l" => Ok(SignalKind::DeltaLevel),
            "dbeta_s" => Ok(SignalKind::DeltaSlope),
            "dbeta_c" => Ok(SignalKind::DeltaCurvature),
            "dslope" => Ok(SignalKind::SlopeDiff),
            "dpc2" => Ok(SignalKind::Pc2),
            _ => {
                if let Some(k) = s.strip_prefix("ry") {
                    return k.parse().map(SignalKind::RollYield).map_err(|_| format!("unknown signal kind '{s}'"));
                }
                s.parse().map(SignalKind::Factor)
            }
        }
    }
}

/// Which Nelson-Siegel beta a Δβ signal differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beta {
    Level,
    Slope,
    Curvature,
}

impl Beta {
    pub fn kind(self) -> SignalKind {
        match self {
            Beta::Level => SignalKind::DeltaLevel,
            Beta::Slope => SignalKind::DeltaSlope,
            Beta::Curvature => SignalKind::DeltaCurvature,
        }
    }
}

/// Signal values keyed by commodity then date; missing entries are gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPanel {
    pub kind: SignalKind,
    pub calendar: Vec<NaiveDate>,
    pub values: BTreeMap<String, BTreeMap<NaiveDate, f64>>,
}

impl SignalPanel {
    pub fn new(kind: SignalKind, calendar: Vec<NaiveDate>) -> Self {
        Self { kind, calendar, values: BTreeMap::new() }
    }

    pub fn get(&self, commodity: &str, date: NaiveDate) -> Option<f64> {
        self.values.get(commodity).and_then(|m| m.get(&date)).copied()
    }

    /// Cross-section on `date`, in commodity order.
    pub fn on(&self, date: NaiveDate) -> Vec<(&str, f64)> {
        self.values
            .iter()
            .filter_map(|(id, m)| m.get(&date).map(|v| (id.as_str(), *v)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Keeps only the listed commodities.
    pub fn restrict(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            kind: self.kind,
            calendar: self.calendar.clone(),
            values: self.values.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// `date,commodity,kind,value`, sorted by date then commodity.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "date,commodity,kind,value")?;
        let mut rows: Vec<(NaiveDate, &str, f64)> = self
            .values
            .iter()
            .flat_map(|(id, m)| m.iter().map(move |(d, v)| (*d, id.as_str(), *v)))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for (d, id, v) in rows {
            writeln!(out, "{d},{id},{},{v}", self.kind)?;
        }
        out.flush()
    }
}

/// `β_t − β_{t−1}` over consecutive calendar days; a gap on either day leaves a gap.
pub fn delta_beta(fits: &FitPanel, which: Beta) -> SignalPanel {
    let mut panel = SignalPanel::new(which.kind(), fits.calendar.clone());
    for (id, series) in &fits.fits {
        let pick = |d: &NaiveDate| {
            series.get(d).map(|p| match which {
                Beta::Level => p.fit.beta_level,
                Beta::Slope => p.fit.beta_slope,
                Beta::Curvature => p.fit.beta_curvature,
            })
        };
        let values: BTreeMap<NaiveDate, f64> = fits
            .calendar
            .windows(2)
            .filter_map(|w| Some((w[1], pick(&w[1])? - pick(&w[0])?)))
            .collect();
        panel.values.insert(id.clone(), values);
    }
    panel
}

/// Trailing unweighted mean over `window` consecutive calendar days, all of
/// which must carry a value.
pub fn smooth(panel: &SignalPanel, window: usize) -> SignalPanel {
    assert!(window >= 1, "smoothing window must be positive");
    let mut out = SignalPanel::new(panel.kind, panel.calendar.clone());
    for (id, series) in &panel.values {
        let values: BTreeMap<NaiveDate, f64> = panel
            .calendar
            .windows(window)
            .filter_map(|w| {
                // anchored on the first value so constant windows are reproduced exactly
                let first = *series.get(&w[0])?;
                let mut sum = 0.0;
                for d in w {
                    sum += series.get(d)? - first;
                }
                Some((w[window - 1], first + sum / window as f64))
            })
            .collect();
        out.values.insert(id.clone(), values);
    }
    out
}
