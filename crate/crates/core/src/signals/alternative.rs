//! Model-free slope signals: change in the front-fourth spread, change in the
//! second principal component, and roll yield.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{SignalKind, SignalPanel};
use crate::marketdata::{CurveSnapshot, SnapshotPanel};

/// Relative separation below which two covariance eigenvalues are treated as
/// repeated and the PC2 direction as undefined.
pub const EIGEN_GAP_TOL: f64 = 1e-12;

fn front_four(s: &CurveSnapshot) -> Option<[f64; 4]> {
    Some([s.price(1)?, s.price(2)?, s.price(3)?, s.price(4)?])
}

/// `ΔS_t` with `S_t = F¹_t − F⁴_t`.
pub fn slope_diff(snapshots: &SnapshotPanel) -> SignalPanel {
    let mut panel = SignalPanel::new(SignalKind::SlopeDiff, snapshots.calendar.clone());
    for (id, snaps) in &snapshots.snapshots {
        let slope = |d: &NaiveDate| {
            let s = snaps.get(d)?;
            Some(s.price(1)? - s.price(4)?)
        };
        let values: BTreeMap<NaiveDate, f64> = snapshots
            .calendar
            .windows(2)
            .filter_map(|w| Some((w[1], slope(&w[1])? - slope(&w[0])?)))
            .collect();
        panel.values.insert(id.clone(), values);
    }
    panel
}

/// Second principal direction of the sample covariance of `rows`, oriented
/// so its first loading exceeds its fourth. `None` when the direction is not
/// identified.
pub(crate) fn second_component(rows: &[[f64; 4]]) -> Option<DVector<f64>> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let x = DMatrix::from_fn(n, 4, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, 4, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let ev: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = ev[0].abs();
    if scale == 0.0 || (ev[0] - ev[1]).abs() <= EIGEN_GAP_TOL * scale || (ev[1] - ev[2]).abs() <= EIGEN_GAP_TOL * scale {
        return None;
    }
    orient(eig.eigenvectors.column(order[1]).into_owned())
}

/// Sign convention: front loading minus fourth loading is positive.
pub(crate) fn orient(v: DVector<f64>) -> Option<DVector<f64>> {
    let tilt = v[0] - v[3];
    if tilt > 0.0 {
        Some(v)
    } else if tilt < 0.0 {
        Some(-v)
    } else {
        None
    }
}

/// `ΔPC2_t`: projection of `P_t − P_{t−1}` on the oriented second principal
/// direction of the price covariance over the `window` days ending at `t`.
pub fn pca_slope(snapshots: &SnapshotPanel, window: usize) -> SignalPanel {
    assert!(window >= 2, "PCA window must cover at least two days");
    let mut panel = SignalPanel::new(SignalKind::Pc2, snapshots.calendar.clone());
    for (id, snaps) in &snapshots.snapshots {
        let mut values = BTreeMap::new();
        for w in snapshots.calendar.windows(window) {
            let rows: Option<Vec<[f64; 4]>> = w.iter().map(|d| snaps.get(d).and_then(front_four)).collect();
            let Some(rows) = rows else { continue };
            let Some(v) = second_component(&rows) else { continue };
            let (today, yesterday) = (&rows[window - 1], &rows[window - 2]);
            let value: f64 = (0..4).map(|j| v[j] * (today[j] - yesterday[j])).sum();
            values.insert(w[window - 1], value);
        }
        panel.values.insert(id.clone(), values);
    }
    panel
}

/// `F¹_t / F^k_t − 1`; commodity-days with fewer than `k` contracts are skipped.
pub fn roll_yield(snapshots: &SnapshotPanel, k: usize) -> SignalPanel {
    let mut panel = SignalPanel::new(SignalKind::RollYield(k), snapshots.calendar.clone());
    for (id, snaps) in &snapshots.snapshots {
        let values: BTreeMap<NaiveDate, f64> = snaps
            .iter()
            .filter_map(|(d, s)| Some((*d, s.price(1)? / s.price(k)? - 1.0)))
            .collect();
        panel.values.insert(id.clone(), values);
    }
    panel
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 6, day).unwrap()
    }

    fn panel(curves: &[(u32, [f64; 4])]) -> SnapshotPanel {
        let mut p = SnapshotPanel { depth: 4, ..Default::default() };
        let mut m = BTreeMap::new();
        for (day, prices) in curves {
            p.calendar.push(d(*day));
            m.insert(d(*day), CurveSnapshot::from_curve(d(*day), "x", &[1.0, 2.0, 3.0, 4.0], prices));
        }
        p.snapshots.insert("x".into(), m);
        p
    }

    #[test]
    fn slope_change_cases() {
        let p = panel(&[(1, [100.0, 99.0, 98.0, 97.0]), (2, [101.0, 100.0, 99.0, 98.0]), (3, [102.0, 100.0, 99.0, 98.0]), (4, [102.0, 100.0, 99.0, 98.0])]);
        let s = slope_diff(&p);
        assert_eq!(s.get("x", d(2)), Some(0.0));
        assert_eq!(s.get("x", d(3)), Some(1.0));
        assert_eq!(s.get("x", d(4)), Some(0.0));
        assert_eq!(s.get("x", d(1)), None);
    }

    #[test]
    fn roll_yield_cases() {
        let p = panel(&[(1, [102.0, 101.0, 100.5, 100.0]), (2, [100.0, 100.0, 100.0, 100.0])]);
        let r = roll_yield(&p, 4);
        assert!((r.get("x", d(1)).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(r.get("x", d(2)), Some(0.0));
        assert!(roll_yield(&p, 12).values["x"].is_empty());
    }

    #[test]
    fn identical_prices_give_no_component() {
        let rows = vec![[10.0, 9.0, 8.0, 7.0]; 5];
        assert!(second_component(&rows).is_none());
        let p = panel(&(1..=5).map(|i| (i, [10.0, 9.0, 8.0, 7.0])).collect::<Vec<_>>());
        assert!(pca_slope(&p, 5).values["x"].is_empty());
    }

    #[test]
    fn steepening_direction_is_recovered() {
        // level moves dominate and are uncorrelated in-sample with the tilt
        let level = [0.0, 10.0, 0.0, -10.0, 0.0];
        let tilt = [0.0, 0.0, 1.0, 0.0, -1.0];
        let u = [1.0, 1.0 / 3.0, -1.0 / 3.0, -1.0];
        let curves: Vec<(u32, [f64; 4])> = (0..5)
            .map(|t| (t as u32 + 1, std::array::from_fn(|j| 100.0 + level[t] + tilt[t] * u[j])))
            .collect();
        let s = pca_slope(&panel(&curves), 5);
        let v = s.get("x", d(5)).unwrap();
        let norm = (20.0f64 / 9.0).sqrt();
        assert!((v - (-norm)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn orientation_ignores_raw_sign() {
        let v = DVector::from_vec(vec![0.6, 0.2, -0.2, -0.6]);
        assert_eq!(orient(v.clone()), orient(-v.clone()));
        assert!(orient(DVector::from_vec(vec![0.5, 0.1, 0.1, 0.5])).is_none());
    }
}
