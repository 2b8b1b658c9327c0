//! Calendar helpers shared by the loaders, the simulator and the monthly
//! aggregation code.

use chrono::{Datelike, Duration, NaiveDate, Weekday};

/// `(year, month)` key used for calendar-month grouping.
pub type MonthKey = (i32, u32);

pub fn month_key(date: NaiveDate) -> MonthKey {
    (date.year(), date.month())
}

pub fn is_weekday(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// `n` consecutive Monday-Friday dates starting at (or after) `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if is_weekday(d) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Last date of each calendar month present in a sorted date list.
pub fn month_ends(dates: &[NaiveDate]) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    for (i, d) in dates.iter().enumerate() {
        match dates.get(i + 1) {
            Some(next) if month_key(*next) == month_key(*d) => {}
            _ => out.push(*d),
        }
    }
    out
}

/// Shift a month key by `delta` months.
pub fn add_months(key: MonthKey, delta: i32) -> MonthKey {
    let idx = key.0 * 12 + key.1 as i32 - 1 + delta;
    (idx.div_euclid(12), (idx.rem_euclid(12) + 1) as u32)
}

/// Number of months from `a` to `b` (`b - a`).
pub fn months_between(a: MonthKey, b: MonthKey) -> i32 {
    (b.0 * 12 + b.1 as i32) - (a.0 * 12 + a.1 as i32)
}

/// Day `day` of the given month, clamped to the month length and moved back
/// to the preceding Friday when it falls on a weekend.
pub fn weekday_on_or_before(key: MonthKey, day: u32) -> NaiveDate {
    let mut d = day.max(1);
    let date = loop {
        if let Some(date) = NaiveDate::from_ymd_opt(key.0, key.1, d) {
            break date;
        }
        d -= 1;
    };
    let mut date = date;
    while !is_weekday(date) {
        date -= Duration::days(1);
    }
    date
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn business_days_skip_weekends() {
        // 2024-03-01 is a Friday
        let days = business_days(d(2024, 3, 1), 3);
        assert_eq!(days, vec![d(2024, 3, 1), d(2024, 3, 4), d(2024, 3, 5)]);
    }

    #[test]
    fn month_ends_picks_last_date_per_month() {
        let dates = vec![d(2024, 1, 30), d(2024, 1, 31), d(2024, 2, 1), d(2024, 2, 29)];
        assert_eq!(month_ends(&dates), vec![d(2024, 1, 31), d(2024, 2, 29)]);
    }

    #[test]
    fn month_arithmetic_wraps_years() {
        assert_eq!(add_months((2023, 11), 3), (2024, 2));
        assert_eq!(add_months((2024, 1), -1), (2023, 12));
        assert_eq!(months_between((2023, 11), (2024, 2)), 3);
    }

    #[test]
    fn expiry_day_avoids_weekends() {
        // 2024-06-15 is a Saturday
        assert_eq!(weekday_on_or_before((2024, 6), 15), d(2024, 6, 14));
        assert_eq!(weekday_on_or_before((2023, 2), 31), d(2023, 2, 28));
    }
}
