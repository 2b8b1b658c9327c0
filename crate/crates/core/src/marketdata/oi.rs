use super::{roll_schedule, ContractChain, MarketDataError};

/// Average open-interest share per curve location.
#[derive(Debug, Clone, PartialEq)]
pub struct OiProfile {
    pub commodity_id: String,
    /// `share[k-1]`: mean share of location `k` in the total OI of the first `k_max` live contracts.
    pub share: Vec<f64>,
    /// Running sum of `share`; non-decreasing, 1 at `k_max` when any day was used.
    pub cumulative: Vec<f64>,
    pub days_used: usize,
}

/// Per-location open-interest shares averaged over all trading days. Days on
/// which the live contracts carry zero total open interest are skipped.
pub fn open_interest_profile(chain: &ContractChain, k_max: usize) -> Result<OiProfile, MarketDataError> {
    if k_max == 0 {
        return Err(MarketDataError::Config("k_max must be at least 1".into()));
    }
    let calendar = chain.calendar();
    // depth-1 schedule gives the front index; later locations follow in expiry order
    let front = roll_schedule(chain, 1)?;
    let mut sums = vec![0.0; k_max];
    let mut days_used = 0usize;
    for (i, date) in calendar.iter().enumerate() {
        let Some(start) = front.days[i].locations.as_ref().map(|l| l[0]) else {
            continue;
        };
        let ois: Vec<f64> = chain.contracts[start..]
            .iter()
            .filter_map(|c| c.bar(*date).map(|b| b.open_interest))
            .take(k_max)
            .collect();
        let total: f64 = ois.iter().sum();
        if total <= 0.0 {
            continue;
        }
        days_used += 1;
        for (k, oi) in ois.iter().enumerate() {
            sums[k] += oi / total;
        }
    }
    let share: Vec<f64> = if days_used == 0 {
        vec![0.0; k_max]
    } else {
        sums.iter().map(|s| s / days_used as f64).collect()
    };
    let mut cumulative = Vec::with_capacity(k_max);
    let mut acc = 0.0;
    for s in &share {
        acc += s;
        cumulative.push(acc);
    }
    if days_used > 0 {
        // guard against the last partial sum landing a few ulps off 1
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        for k in (0..k_max.saturating_sub(1)).rev() {
            cumulative[k] = cumulative[k].min(cumulative[k + 1]);
        }
    }
    Ok(OiProfile { commodity_id: chain.commodity_id.clone(), share, cumulative, days_used })
}
