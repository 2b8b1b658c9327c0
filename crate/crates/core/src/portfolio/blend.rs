use crate::calendar::month_key;
use crate::series::ReturnSeries;

/// 50/50 blend of two return streams on their common dates: sleeves drift
/// within a calendar month and are reset to equal capital when the month changes.
pub fn blend(a: &ReturnSeries, b: &ReturnSeries) -> ReturnSeries {
    let (dates, ra, rb) = a.align(b);
    let mut values = Vec::with_capacity(dates.len());
    let (mut wa, mut wb) = (0.5, 0.5);
    for i in 0..dates.len() {
        if i == 0 || month_key(dates[i]) != month_key(dates[i - 1]) {
            wa = 0.5;
            wb = 0.5;
        }
        let r = wa * ra[i] + wb * rb[i];
        values.push(r);
        wa = wa * (1.0 + ra[i]) / (1.0 + r);
        wb = wb * (1.0 + rb[i]) / (1.0 + r);
    }
    ReturnSeries::new(dates, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn d(m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, m, day).unwrap()
    }

    #[test]
    fn drifted_two_day_month() {
        let a = ReturnSeries::new(vec![d(3, 30), d(3, 31), d(4, 1)], vec![0.01, 0.0, 0.02]);
        let b = ReturnSeries::new(vec![d(3, 30), d(3, 31), d(4, 1)], vec![0.0, 0.01, 0.0]);
        let m = blend(&a, &b);
        assert!((m.values[0] - 0.005).abs() < 1e-18);
        assert!((m.values[1] - 0.5 / 1.005 * 0.01).abs() < 1e-17);
        // new month resets to equal weights
        assert_eq!(m.values[2], 0.5 * 0.02);
    }

    #[test]
    fn identical_sleeves() {
        let a = ReturnSeries::new(vec![d(1, 4), d(1, 5), d(1, 6)], vec![0.01, -0.02, 0.005]);
        let m = blend(&a, &a);
        for (x, y) in m.values.iter().zip(&a.values) {
            assert!((x - y).abs() < 1e-17);
        }
    }
}
