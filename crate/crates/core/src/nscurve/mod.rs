//! Daily Nelson-Siegel fits of futures curves.
//!
//! Given the decay factor `λ`, the model is linear in its betas, so every fit
//! is an exact least-squares solve. `λ` is pinned each day at the value that
//! maximizes the curvature loading at the snapshot's mean maturity.
//!
//! With the default four contracts and three betas a full fit has a single
//! residual degree of freedom, so its R² is close to saturated by
//! construction; it is still reported for comparison with restricted fits.

mod fit;
mod loadings;
mod panel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{fit_ns, fit_ns_seasonal, fit_ns_with_lambda, r_squared, NsFit, SeasonalNsFit, SEASONAL_OMEGA};
pub use loadings::{
    curvature_loading, curvature_loading_x, curvature_peak, decay_factor, ns_loadings, slope_loading,
    slope_loading_x,
};
pub use panel::{fit_panel, fit_snapshots, write_fit_panel_csv, FitPanel, PanelFit, SeasonalSelection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{commodity} {date}: rank-deficient design ({rank} of {columns} columns)")]
    RankDeficient { commodity: String, date: chrono::NaiveDate, rank: usize, columns: usize },
    #[error("{commodity} {date}: {points} points cannot identify {params} parameters")]
    TooFewPoints { commodity: String, date: chrono::NaiveDate, points: usize, params: usize },
}

/// Which Nelson-Siegel components enter a fit. The level is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentSet {
    pub slope: bool,
    pub curvature: bool,
}

impl ComponentSet {
    pub const fn full() -> Self {
        Self { slope: true, curvature: true }
    }

    pub const fn level_slope() -> Self {
        Self { slope: true, curvature: false }
    }

    pub const fn level_curvature() -> Self {
        Self { slope: false, curvature: true }
    }

    pub const fn level_only() -> Self {
        Self { slope: false, curvature: false }
    }

    /// Number of design columns.
    pub fn len(&self) -> usize {
        1 + self.slope as usize + self.curvature as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for ComponentSet {
    fn default() -> Self {
        Self::full()
    }
}
