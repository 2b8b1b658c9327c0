use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::{BookDay, Family, Geometry, Leg, Mode, NaiveKind, Position, Rebalance, StrategySpec, WeightBook};
use crate::calendar::month_ends;
use crate::nscurve::FitPanel;
use crate::signals::SignalPanel;

/// Commodities with a fit on each date.
pub fn availability(fits: &FitPanel) -> BTreeMap<NaiveDate, Vec<String>> {
    let mut out: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
    for (id, m) in &fits.fits {
        for d in m.keys() {
            out.entry(*d).or_default().push(id.clone());
        }
    }
    out
}

fn push_commodity(positions: &mut Vec<Position>, id: &str, geometry: Geometry, capital: f64, leg: Leg) {
    let sign = if leg == Leg::Long { 1.0 } else { -1.0 };
    for (location, w) in geometry.template() {
        positions.push(Position { commodity: id.to_string(), location, weight: sign * capital * w, leg });
    }
}

/// Two legs of 0.5 capital each, equal capital per commodity within a leg.
fn two_leg_day(long: &[&str], short: &[&str], geometry: Geometry) -> BookDay {
    let mut positions = Vec::new();
    for (names, leg) in [(long, Leg::Long), (short, Leg::Short)] {
        if !names.is_empty() {
            let capital = 0.5 / names.len() as f64;
            for id in names {
                push_commodity(&mut positions, id, geometry, capital, leg);
            }
        }
    }
    BookDay { degenerate: long.is_empty() != short.is_empty(), positions }
}

/// Cross-sectional L/S/C book: positive signals long, negative short. Zero
/// signals are excluded for L and sent to the short leg for S and C.
pub fn build_cs_book(signal: &SignalPanel, spec: &StrategySpec) -> WeightBook {
    let zeros_short = !matches!(spec.family, Family::Level);
    let mut book = WeightBook::new(Rebalance::Daily);
    for &date in &signal.calendar {
        let cross = signal.on(date);
        if cross.is_empty() {
            continue;
        }
        let long: Vec<&str> = cross.iter().filter(|(_, v)| *v > 0.0).map(|(id, _)| *id).collect();
        let short: Vec<&str> = cross
            .iter()
            .filter(|(_, v)| *v < 0.0 || (zeros_short && *v == 0.0))
            .map(|(id, _)| *id)
            .collect();
        book.days.insert(date, two_leg_day(&long, &short, spec.geometry));
    }
    book
}

/// Time-series book: capital `1/N` per commodity with a non-zero signal,
/// direction given by the sign.
pub fn build_ts_book(signal: &SignalPanel, spec: &StrategySpec) -> WeightBook {
    let mut book = WeightBook::new(Rebalance::Daily);
    for &date in &signal.calendar {
        let cross = signal.on(date);
        if cross.is_empty() {
            continue;
        }
        let active: Vec<(&str, f64)> = cross.into_iter().filter(|(_, v)| *v != 0.0).collect();
        let mut positions = Vec::new();
        let capital = 1.0 / active.len().max(1) as f64;
        for (id, v) in &active {
            let leg = if *v > 0.0 { Leg::Long } else { Leg::Short };
            push_commodity(&mut positions, id, spec.geometry, capital, leg);
        }
        book.days.insert(date, BookDay { positions, degenerate: false });
    }
    book
}

/// Equal-weight long-only benchmark over the commodities available each date.
/// `Avg` is set on month-end dates only.
pub fn build_naive_book(kind: NaiveKind, universe: &BTreeMap<NaiveDate, Vec<String>>) -> WeightBook {
    let spec = StrategySpec::new(Family::Naive(kind));
    let dates: Vec<NaiveDate> = match kind {
        NaiveKind::Avg => month_ends(&universe.keys().copied().collect::<Vec<_>>()),
        _ => universe.keys().copied().collect(),
    };
    let mut book = WeightBook::new(spec.rebalance);
    for date in dates {
        let names = &universe[&date];
        if names.is_empty() {
            continue;
        }
        let mut positions = Vec::new();
        let capital = 1.0 / names.len() as f64;
        for id in names {
            push_commodity(&mut positions, id, spec.geometry, capital, Leg::Long);
        }
        book.days.insert(date, BookDay { positions, degenerate: false });
    }
    book
}

/// Month-end median split on fronts. With an odd cross-section the extra name
/// joins the long leg; equal values are ordered by commodity id.
pub fn build_factor_book(signal: &SignalPanel, high_is_long: bool) -> WeightBook {
    let mut book = WeightBook::new(Rebalance::Monthly);
    for date in month_ends(&signal.calendar) {
        let mut cross = signal.on(date);
        if cross.len() < 2 {
            book.days.insert(date, BookDay::default());
            continue;
        }
        cross.sort_by(|a, b| {
            let by_value = if high_is_long { b.1.total_cmp(&a.1) } else { a.1.total_cmp(&b.1) };
            match by_value {
                Ordering::Equal => a.0.cmp(b.0),
                o => o,
            }
        });
        let n_long = cross.len().div_ceil(2);
        let long: Vec<&str> = cross[..n_long].iter().map(|(id, _)| *id).collect();
        let short: Vec<&str> = cross[n_long..].iter().map(|(id, _)| *id).collect();
        book.days.insert(date, two_leg_day(&long, &short, Geometry::Outright));
    }
    book
}

/// Dispatches on the spec. `universe` is used by the naive benchmarks only.
pub fn build_book(spec: &StrategySpec, signal: Option<&SignalPanel>, universe: &BTreeMap<NaiveDate, Vec<String>>) -> WeightBook {
    match (spec.family, signal) {
        (Family::Naive(kind), _) => build_naive_book(kind, universe),
        (Family::Factor(c), Some(s)) => build_factor_book(s, c.high_is_long()),
        (_, Some(s)) if spec.mode == Mode::TimeSeries => build_ts_book(s, spec),
        (_, Some(s)) => build_cs_book(s, spec),
        (_, None) => WeightBook::new(spec.rebalance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{Characteristic, SignalKind};

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 31).unwrap()
    }

    fn panel(values: &[(&str, f64)]) -> SignalPanel {
        let mut p = SignalPanel::new(SignalKind::DeltaSlope, vec![day()]);
        for (id, v) in values {
            p.values.insert(id.to_string(), [(day(), *v)].into_iter().collect());
        }
        p
    }

    fn weights(book: &WeightBook, id: &str) -> Vec<(usize, f64)> {
        book.days[&day()].positions.iter().filter(|p| p.commodity == id).map(|p| (p.location, p.weight)).collect()
    }

    #[test]
    fn two_name_slope_book() {
        let book = build_cs_book(&panel(&[("a", 0.2), ("b", -0.1)]), &StrategySpec::new(Family::Slope));
        assert_eq!(weights(&book, "a"), vec![(1, 0.25), (4, -0.25)]);
        assert_eq!(weights(&book, "b"), vec![(1, -0.25), (4, 0.25)]);
        assert!(!book.days[&day()].degenerate);
        assert_eq!(book.days[&day()].gross(), 1.0);
    }

    #[test]
    fn one_sided_level_book_is_degenerate() {
        let book = build_cs_book(&panel(&[("a", 1.0), ("b", 2.0), ("c", 0.5), ("d", 3.0)]), &StrategySpec::new(Family::Level));
        let d = &book.days[&day()];
        assert!(d.degenerate);
        assert!((d.leg_gross(Leg::Long) - 0.5).abs() < 1e-15);
        assert_eq!(d.leg_gross(Leg::Short), 0.0);
    }

    #[test]
    fn level_zero_excluded_slope_zero_short() {
        let p = panel(&[("a", 1.0), ("b", 0.0), ("c", -1.0)]);
        let l = build_cs_book(&p, &StrategySpec::new(Family::Level));
        assert!(weights(&l, "b").is_empty());
        let s = build_cs_book(&p, &StrategySpec::new(Family::Slope));
        assert!(weights(&s, "b")[0].1 < 0.0);
        let all_zero = build_cs_book(&panel(&[("a", 0.0)]), &StrategySpec::new(Family::Level));
        assert!(all_zero.days[&day()].positions.is_empty());
    }

    #[test]
    fn single_name_butterfly() {
        let book = build_cs_book(&panel(&[("a", 1.0)]), &StrategySpec::new(Family::Curvature));
        assert_eq!(weights(&book, "a"), vec![(1, -0.125), (2, 0.25), (4, -0.125)]);
        assert!(book.days[&day()].degenerate);
    }

    #[test]
    fn time_series_magnitudes() {
        let s = build_ts_book(&panel(&[("a", 0.3), ("b", 0.1)]), &StrategySpec::new(Family::Slope).time_series());
        assert_eq!(weights(&s, "a"), vec![(1, 0.25), (4, -0.25)]);
        let c = build_ts_book(&panel(&[("a", -2.0)]), &StrategySpec::new(Family::Curvature).time_series());
        assert_eq!(weights(&c, "a"), vec![(1, 0.25), (2, -0.5), (4, 0.25)]);
        let z = build_ts_book(&panel(&[("a", 0.0), ("b", 0.0)]), &StrategySpec::new(Family::Level).time_series());
        assert!(z.days[&day()].positions.is_empty());
    }

    #[test]
    fn naive_books() {
        let ids: Vec<String> = (0..21).map(|i| format!("c{i:02}")).collect();
        let universe: BTreeMap<NaiveDate, Vec<String>> = [(day(), ids)].into_iter().collect();
        let l = build_naive_book(NaiveKind::Lavg, &universe);
        assert!(l.days[&day()].positions.iter().all(|p| (p.weight - 1.0 / 21.0).abs() < 1e-15));
        let two: BTreeMap<NaiveDate, Vec<String>> = [(day(), vec!["a".into(), "b".into()])].into_iter().collect();
        assert_eq!(weights(&build_naive_book(NaiveKind::Savg, &two), "b"), vec![(1, 0.25), (4, -0.25)]);
        let one: BTreeMap<NaiveDate, Vec<String>> = [(day(), vec!["a".into()])].into_iter().collect();
        assert_eq!(weights(&build_naive_book(NaiveKind::Cavg, &one), "a"), vec![(1, -0.25), (2, 0.5), (4, -0.25)]);
    }

    #[test]
    fn factor_median_split() {
        let mut p = panel(&[("a", 4.0), ("b", 3.0), ("c", 2.0), ("d", 1.0)]);
        p.kind = SignalKind::Factor(Characteristic::Momentum);
        let book = build_factor_book(&p, true);
        assert_eq!(weights(&book, "a"), vec![(1, 0.25)]);
        assert_eq!(weights(&book, "d"), vec![(1, -0.25)]);

        let odd = panel(&[("a", -0.5), ("b", 0.1), ("c", 0.2), ("d", 0.3), ("e", 0.4)]);
        let skew = build_factor_book(&odd, false);
        let d = &skew.days[&day()];
        assert_eq!(d.positions.iter().filter(|p| p.leg == Leg::Long).count(), 3);
        assert_eq!(weights(&skew, "a")[0].1, 0.5 / 3.0);
        assert!(weights(&skew, "e")[0].1 < 0.0);
    }

    #[test]
    fn sign_flip_swaps_legs() {
        let p = panel(&[("a", 0.3), ("b", -0.2), ("c", 0.1)]);
        let mut neg = p.clone();
        for m in neg.values.values_mut() {
            for v in m.values_mut() {
                *v = -*v;
            }
        }
        let spec = StrategySpec::new(Family::Level);
        let a = build_cs_book(&p, &spec);
        let b = build_cs_book(&neg, &spec);
        let sorted = |book: &WeightBook| {
            let mut v = book.days[&day()].positions.clone();
            v.sort_by(|x, y| x.commodity.cmp(&y.commodity));
            v
        };
        for (x, y) in sorted(&a).iter().zip(&sorted(&b)) {
            assert_eq!(x.weight, -y.weight);
            assert_ne!(x.leg, y.leg);
        }
    }
}
