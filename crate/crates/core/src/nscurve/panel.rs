use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_ns, fit_ns_seasonal, ComponentSet, NsFit};
use crate::marketdata::{universe::SEASONAL_NINE, ContractChain, Gap, MarketDataError, SnapshotPanel};

/// Which commodities are fitted with the seasonal model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonalSelection {
    #[default]
    None,
    /// The nine strongly seasonal markets.
    Nine,
    All,
    Custom(BTreeSet<String>),
}

impl SeasonalSelection {
    pub fn applies(&self, commodity: &str) -> bool {
        match self {
            SeasonalSelection::None => false,
            SeasonalSelection::Nine => SEASONAL_NINE.contains(&commodity),
            SeasonalSelection::All => true,
            SeasonalSelection::Custom(set) => set.contains(commodity),
        }
    }
}

/// A fitted commodity-day. `seasonal` holds `(β_SE, θ)` for seasonal fits.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelFit {
    pub fit: NsFit,
    pub seasonal: Option<(f64, u32)>,
}

#[derive(Debug, Clone, Default)]
pub struct FitPanel {
    pub calendar: Vec<NaiveDate>,
    pub fits: BTreeMap<String, BTreeMap<NaiveDate, PanelFit>>,
    pub gaps: Vec<Gap>,
}

impl FitPanel {
    pub fn get(&self, commodity: &str, date: NaiveDate) -> Option<&PanelFit> {
        self.fits.get(commodity).and_then(|m| m.get(&date))
    }

    pub fn len(&self) -> usize {
        self.fits.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fits on one date across commodities, in commodity order.
    pub fn on(&self, date: NaiveDate) -> impl Iterator<Item = &PanelFit> {
        self.fits.values().filter_map(move |m| m.get(&date))
    }
}

/// Fits every available snapshot; failures become gaps.
pub fn fit_snapshots(snapshots: &SnapshotPanel, components: ComponentSet, seasonal: &SeasonalSelection) -> FitPanel {
    let per: Vec<(String, BTreeMap<NaiveDate, PanelFit>, Vec<Gap>)> = snapshots
        .snapshots
        .par_iter()
        .map(|(id, snaps)| {
            let use_seasonal = seasonal.applies(id);
            let mut fits = BTreeMap::new();
            let mut gaps = Vec::new();
            for (date, snap) in snaps {
                let res = if use_seasonal {
                    fit_ns_seasonal(snap).map(|s| PanelFit { seasonal: Some((s.beta_seasonal, s.theta)), fit: s.base })
                } else {
                    fit_ns(snap, components).map(|fit| PanelFit { fit, seasonal: None })
                };
                match res {
                    Ok(f) => {
                        fits.insert(*date, f);
                    }
                    Err(e) => gaps.push(Gap { commodity_id: id.clone(), date: *date, reason: e.to_string() }),
                }
            }
            (id.clone(), fits, gaps)
        })
        .collect();
    let mut panel = FitPanel { calendar: snapshots.calendar.clone(), ..Default::default() };
    panel.gaps = snapshots.gaps.clone();
    for (id, fits, gaps) in per {
        panel.fits.insert(id, fits);
        panel.gaps.extend(gaps);
    }
    panel.gaps.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.commodity_id.cmp(&b.commodity_id)));
    panel
}

/// Builds snapshots at `depth` over `calendar` and fits them.
pub fn fit_panel(
    chains: &[ContractChain],
    calendar: &[NaiveDate],
    depth: usize,
    components: ComponentSet,
    seasonal: &SeasonalSelection,
) -> Result<FitPanel, MarketDataError> {
    let snaps = SnapshotPanel::build(chains, calendar, depth)?;
    Ok(fit_snapshots(&snaps, components, seasonal))
}

/// `date,commodity,beta_level,beta_slope,beta_curvature,beta_seasonal,theta,lambda,r2`
pub fn write_fit_panel_csv(panel: &FitPanel, path: impl AsRef<Path>) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "date,commodity,beta_level,beta_slope,beta_curvature,beta_seasonal,theta,lambda,r2")?;
    let mut rows: Vec<(&NaiveDate, &String, &PanelFit)> = panel
        .fits
        .iter()
        .flat_map(|(id, m)| m.iter().map(move |(d, f)| (d, id, f)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(b.1)));
    for (d, id, f) in rows {
        let (se, th) = match f.seasonal {
            Some((b, t)) => (b.to_string(), t.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{d},{id},{},{},{},{se},{th},{},{}",
            f.fit.beta_level, f.fit.beta_slope, f.fit.beta_curvature, f.fit.lambda, f.fit.r_squared
        )?;
    }
    out.flush()
}
