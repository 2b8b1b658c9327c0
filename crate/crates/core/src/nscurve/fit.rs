use std::f64::consts::PI;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use super::{decay_factor, ns_loadings, ComponentSet, NsError};
use crate::linalg::least_squares;
use crate::marketdata::CurveSnapshot;

/// Angular frequency of the annual seasonal term (maturities in months).
pub const SEASONAL_OMEGA: f64 = 2.0 * PI / 12.0;

/// R² differences below this are treated as ties when choosing the seasonal phase.
const THETA_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NsFit {
    pub date: NaiveDate,
    pub commodity_id: String,
    pub beta_level: f64,
    /// Zero when the slope component is excluded.
    pub beta_slope: f64,
    /// Zero when the curvature component is excluded.
    pub beta_curvature: f64,
    pub lambda: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub components: ComponentSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalNsFit {
    pub base: NsFit,
    pub beta_seasonal: f64,
    /// Seasonal phase in months, `1..=12`.
    pub theta: u32,
}

/// `1 - RSS/TSS` about the mean, with the flat-curve conventions: a zero TSS
/// gives 1 when the fit is also exact and 0 otherwise.
pub fn r_squared(y: &[f64], rss: f64) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let scale: f64 = y.iter().map(|v| v * v).sum();
    let tiny = 1e-24 * scale;
    if tss <= tiny {
        return if rss <= tiny { 1.0 } else { 0.0 };
    }
    1.0 - rss / tss
}

fn solve(
    snapshot: &CurveSnapshot,
    design: &DMatrix<f64>,
) -> Result<(DVector<f64>, Vec<f64>, f64), NsError> {
    let y = DVector::from_vec(snapshot.prices());
    let ls = least_squares(design, &y).map_err(|e| NsError::RankDeficient {
        commodity: snapshot.commodity_id.clone(),
        date: snapshot.date,
        rank: e.rank,
        columns: e.columns,
    })?;
    let r2 = r_squared(y.as_slice(), ls.rss);
    Ok((ls.coefficients, ls.residuals.iter().copied().collect(), r2))
}

fn mean_maturity(snapshot: &CurveSnapshot) -> f64 {
    let m = snapshot.maturities();
    m.iter().sum::<f64>() / m.len() as f64
}

/// Least-squares fit at a given decay factor.
pub fn fit_ns_with_lambda(snapshot: &CurveSnapshot, lambda: f64, components: ComponentSet) -> Result<NsFit, NsError> {
    let p = components.len();
    if snapshot.depth() < p {
        return Err(NsError::TooFewPoints {
            commodity: snapshot.commodity_id.clone(),
            date: snapshot.date,
            points: snapshot.depth(),
            params: p,
        });
    }
    let design = ns_loadings(lambda, &snapshot.maturities(), components)?;
    let (beta, residuals, r2) = solve(snapshot, &design)?;
    let mut it = beta.iter().copied();
    let beta_level = it.next().unwrap_or(0.0);
    let beta_slope = if components.slope { it.next().unwrap_or(0.0) } else { 0.0 };
    let beta_curvature = if components.curvature { it.next().unwrap_or(0.0) } else { 0.0 };
    Ok(NsFit {
        date: snapshot.date,
        commodity_id: snapshot.commodity_id.clone(),
        beta_level,
        beta_slope,
        beta_curvature,
        lambda,
        r_squared: r2,
        residuals,
        components,
    })
}

/// Fits the (possibly restricted) Nelson-Siegel model with the daily decay
/// factor taken from the snapshot's mean maturity.
pub fn fit_ns(snapshot: &CurveSnapshot, components: ComponentSet) -> Result<NsFit, NsError> {
    if snapshot.depth() == 0 {
        return Err(NsError::TooFewPoints {
            commodity: snapshot.commodity_id.clone(),
            date: snapshot.date,
            points: 0,
            params: components.len(),
        });
    }
    let lambda = decay_factor(mean_maturity(snapshot))?;
    fit_ns_with_lambda(snapshot, lambda, components)
}

/// Seasonally adjusted fit: the full model plus `β_SE cos(ωM - ωθ)`, with the
/// integer phase `θ ∈ 1..=12` chosen to maximize R².
///
/// Phases `θ` and `θ ± 6` span the same column up to sign, so they always tie
/// on R². Ties resolve to the phase with a non-negative seasonal beta, then to
/// the smallest `θ`.
pub fn fit_ns_seasonal(snapshot: &CurveSnapshot) -> Result<SeasonalNsFit, NsError> {
    const PARAMS: usize = 4;
    if snapshot.depth() <= PARAMS {
        return Err(NsError::TooFewPoints {
            commodity: snapshot.commodity_id.clone(),
            date: snapshot.date,
            points: snapshot.depth(),
            params: PARAMS + 1,
        });
    }
    let maturities = snapshot.maturities();
    let lambda = decay_factor(mean_maturity(snapshot))?;
    let base = ns_loadings(lambda, &maturities, ComponentSet::full())?;
    let mut candidates = Vec::with_capacity(12);
    for theta in 1..=12u32 {
        let mut design = base.clone().insert_column(3, 0.0);
        for (i, m) in maturities.iter().enumerate() {
            design[(i, 3)] = (SEASONAL_OMEGA * m - SEASONAL_OMEGA * theta as f64).cos();
        }
        let (beta, residuals, r2) = solve(snapshot, &design)?;
        candidates.push((theta, beta, residuals, r2));
    }
    let best_r2 = candidates.iter().map(|c| c.3).fold(f64::NEG_INFINITY, f64::max);
    let tied = || candidates.iter().filter(|c| c.3 >= best_r2 - THETA_TIE_TOL);
    let chosen = tied()
        .find(|c| c.1[3] >= 0.0)
        .or_else(|| tied().next())
        .expect("at least one phase attains the maximum");
    let (theta, beta, residuals, r2) = chosen.clone();
    Ok(SeasonalNsFit {
        base: NsFit {
            date: snapshot.date,
            commodity_id: snapshot.commodity_id.clone(),
            beta_level: beta[0],
            beta_slope: beta[1],
            beta_curvature: beta[2],
            lambda,
            r_squared: r2,
            residuals,
            components: ComponentSet::full(),
        },
        beta_seasonal: beta[3],
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{curvature_loading, slope_loading};
    use super::*;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 2).unwrap()
    }

    fn model(beta: (f64, f64, f64), lambda: f64, m: f64) -> f64 {
        beta.0 + beta.1 * slope_loading(lambda, m) + beta.2 * curvature_loading(lambda, m)
    }

    #[test]
    fn flat_curve() {
        let snap = CurveSnapshot::from_curve(date(), "x", &[1.0, 2.0, 3.0, 4.0], &[100.0; 4]);
        let fit = fit_ns(&snap, ComponentSet::full()).unwrap();
        assert!((fit.beta_level - 100.0).abs() < 1e-9);
        assert!(fit.beta_slope.abs() < 1e-9);
        assert!(fit.beta_curvature.abs() < 1e-9);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn exact_recovery_at_own_lambda() {
        let m = [1.478, 2.464, 3.483, 4.468];
        let lambda = decay_factor(m.iter().sum::<f64>() / 4.0).unwrap();
        let prices: Vec<f64> = m.iter().map(|mm| model((50.0, -5.0, 2.0), lambda, *mm)).collect();
        let snap = CurveSnapshot::from_curve(date(), "x", &m, &prices);
        let fit = fit_ns(&snap, ComponentSet::full()).unwrap();
        assert!((fit.beta_level - 50.0).abs() < 1e-9);
        assert!((fit.beta_slope + 5.0).abs() < 1e-9);
        assert!((fit.beta_curvature - 2.0).abs() < 1e-9);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9 * 50.0));
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_maturities_are_rank_deficient() {
        let snap = CurveSnapshot::from_curve(date(), "x", &[1.0, 1.0, 2.0], &[10.0, 10.5, 11.0]);
        assert!(matches!(fit_ns(&snap, ComponentSet::full()), Err(NsError::RankDeficient { .. })));
    }

    #[test]
    fn restricted_fit_has_fewer_columns() {
        let snap = CurveSnapshot::from_curve(date(), "x", &[1.0, 2.0, 3.0, 4.0], &[10.0, 10.4, 10.5, 10.9]);
        let ls = fit_ns(&snap, ComponentSet::level_slope()).unwrap();
        assert_eq!(ls.beta_curvature, 0.0);
        let full = fit_ns(&snap, ComponentSet::full()).unwrap();
        assert!(full.r_squared >= ls.r_squared);
    }

    #[test]
    fn r_squared_conventions() {
        assert_eq!(r_squared(&[5.0, 5.0], 0.0), 1.0);
        assert_eq!(r_squared(&[5.0, 5.0], 1.0), 0.0);
        assert!((r_squared(&[1.0, 3.0], 1.0) - 0.5).abs() < 1e-15);
    }

    fn seasonal_curve(beta_se: f64, theta: u32) -> CurveSnapshot {
        let m: Vec<f64> = (0..12).map(|k| 0.6 + k as f64 * 1.003).collect();
        let lambda = decay_factor(m.iter().sum::<f64>() / 12.0).unwrap();
        let p: Vec<f64> = m
            .iter()
            .map(|mm| {
                model((80.0, -6.0, 3.0), lambda, *mm)
                    + beta_se * (SEASONAL_OMEGA * mm - SEASONAL_OMEGA * theta as f64).cos()
            })
            .collect();
        CurveSnapshot::from_curve(date(), "x", &m, &p)
    }

    #[test]
    fn seasonal_recovers_phase_and_amplitude() {
        let fit = fit_ns_seasonal(&seasonal_curve(2.0, 7)).unwrap();
        assert_eq!(fit.theta, 7);
        assert!((fit.beta_seasonal - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_amplitude_matches_plain_fit() {
        let snap = seasonal_curve(0.0, 1);
        let fit = fit_ns_seasonal(&snap).unwrap();
        let plain = fit_ns(&snap, ComponentSet::full()).unwrap();
        assert!(fit.beta_seasonal.abs() < 1e-9);
        assert!((fit.base.r_squared - plain.r_squared).abs() < 1e-9);
    }

    #[test]
    fn seasonal_needs_five_points() {
        let snap = CurveSnapshot::from_curve(date(), "x", &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(fit_ns_seasonal(&snap), Err(NsError::TooFewPoints { .. })));
    }

    #[test]
    fn seasonal_grid_endpoints() {
        for theta in [1, 12] {
            assert_eq!(fit_ns_seasonal(&seasonal_curve(1.5, theta)).unwrap().theta, theta);
        }
    }
}
