use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;

use super::{BacktestError, BacktestResult, CostModel, CostScenario, DayFlags, DriftConvention};
use crate::marketdata::{roll_schedule, ContractChain, RollSchedule};
use crate::portfolio::{Rebalance, WeightBook};

#[derive(Debug, Clone, Copy)]
struct Holding {
    commodity: usize,
    location: usize,
    contract: usize,
    weight: f64,
}

struct Universe<'a> {
    chains: Vec<&'a ContractChain>,
    schedules: Vec<RollSchedule>,
    index: HashMap<&'a str, usize>,
}

impl<'a> Universe<'a> {
    fn contract_at(&self, commodity: usize, date: NaiveDate, location: usize) -> Option<usize> {
        self.schedules[commodity].contract_at(date, location)
    }

    fn settle(&self, h: &Holding, date: NaiveDate) -> Option<f64> {
        self.chains[h.commodity].contracts[h.contract].settle(date)
    }
}

/// Runs a book over `calendar`. The first date only establishes the initial
/// positions (uncosted); every later date yields one result row.
///
/// `spread` marks spread or butterfly books for the single-ticket cost rule.
pub fn evaluate(
    book: &WeightBook,
    chains: &[ContractChain],
    calendar: &[NaiveDate],
    costs: &CostModel,
    spread: bool,
) -> Result<BacktestResult, BacktestError> {
    costs.validate()?;
    if calendar.len() < 2 {
        return Err(BacktestError::EmptyRange);
    }
    let depth = book.max_location();
    let used: std::collections::BTreeSet<&str> =
        book.days.values().flat_map(|d| d.positions.iter().map(|p| p.commodity.as_str())).collect();
    let mut u = Universe { chains: Vec::new(), schedules: Vec::new(), index: HashMap::new() };
    for id in used {
        let chain = chains.iter().find(|c| c.commodity_id == id).ok_or_else(|| BacktestError::UnknownCommodity(id.to_string()))?;
        u.index.insert(chain.commodity_id.as_str(), u.chains.len());
        u.schedules.push(roll_schedule(chain, depth)?);
        u.chains.push(chain);
    }
    let ticket = if spread && costs.spread_ticket { 0.5 } else { 1.0 };

    let mut result = BacktestResult::default();
    let (mut holdings, _) = targets(book, &u, calendar[0], None);
    for w in calendar.windows(2) {
        let (prev, date) = (w[0], w[1]);
        let mut flags = DayFlags::default();

        let mut gross = 0.0;
        let mut drifted = Vec::with_capacity(holdings.len());
        for h in &holdings {
            let r = match (u.settle(h, prev), u.settle(h, date)) {
                (Some(p0), Some(p1)) => p1 / p0 - 1.0,
                _ => {
                    flags.missing_price = true;
                    0.0
                }
            };
            gross += h.weight * r;
            drifted.push(Holding { weight: h.weight * (1.0 + r), ..*h });
        }
        if costs.drift == DriftConvention::GrossPreserving {
            let before: f64 = holdings.iter().map(|h| h.weight.abs()).sum();
            let after: f64 = drifted.iter().map(|h| h.weight.abs()).sum();
            if after > 0.0 {
                let g = before / after;
                drifted.iter_mut().for_each(|h| h.weight *= g);
            }
        }
        flags.roll = drifted.iter().any(|h| u.contract_at(h.commodity, date, h.location) != Some(h.contract));

        let (target, day_flags) = targets(book, &u, date, Some(&drifted));
        flags.degenerate = day_flags.degenerate;
        flags.dropped = day_flags.dropped;

        // per-contract turnover over the union of held and target contracts
        let mut trades: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for h in &target {
            *trades.entry((h.commodity, h.contract)).or_default() += h.weight;
        }
        for h in &drifted {
            *trades.entry((h.commodity, h.contract)).or_default() -= h.weight;
        }
        let mut turnover = 0.0;
        let mut drag = [0.0; 3];
        for (&(c, k), &delta) in &trades {
            let to = delta.abs();
            if to == 0.0 {
                continue;
            }
            turnover += to;
            let chain = u.chains[c];
            let contract = &chain.contracts[k];
            let price = contract.settle(date).or_else(|| contract.last_settle_on_or_before(date));
            if let Some(price) = price {
                let spec = chain.spec();
                for s in CostScenario::ALL {
                    drag[s.index()] += to * costs.unit_cost(s, &spec, price) * ticket;
                }
            }
        }

        result.dates.push(date);
        result.gross.push(gross);
        result.turnover.push(turnover);
        for s in 0..3 {
            result.net[s].push(gross - 0.5 * drag[s]);
        }
        result.flags.push(flags);
        holdings = target;
    }
    Ok(result)
}

/// Target holdings at the close of `date`. Monthly books carry the drifted
/// holdings between rebalance dates, re-mapped to the current contract at
/// each location.
fn targets(book: &WeightBook, u: &Universe, date: NaiveDate, drifted: Option<&[Holding]>) -> (Vec<Holding>, DayFlags) {
    let mut flags = DayFlags::default();
    let mut out = Vec::new();
    match (book.get(date), book.rebalance, drifted) {
        (Some(day), _, _) => {
            flags.degenerate = day.degenerate;
            for p in &day.positions {
                let c = u.index[p.commodity.as_str()];
                match u.contract_at(c, date, p.location) {
                    Some(contract) => out.push(Holding { commodity: c, location: p.location, contract, weight: p.weight }),
                    None => flags.dropped = true,
                }
            }
        }
        (None, Rebalance::Monthly, Some(held)) => {
            for h in held {
                match u.contract_at(h.commodity, date, h.location) {
                    Some(contract) => out.push(Holding { contract, ..*h }),
                    None => flags.dropped = true,
                }
            }
        }
        _ => {}
    }
    (out, flags)
}
