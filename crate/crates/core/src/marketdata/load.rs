//! CSV ingestion and export for price and CoT files.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::{
    Bar, ContractChain, ContractSeries, CotRow, CotSeries, MarketDataError, SpecTable,
};

const PRICE_HEADER: [&str; 6] =
    ["date", "contract_code", "expiry_date", "settle", "volume", "open_interest"];
const COT_HEADER: [&str; 4] = ["date", "commodity_id", "commercial_short", "commercial_long"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MarketDataError + '_ {
    move |source| MarketDataError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, line: u64, e: impl std::fmt::Display) -> MarketDataError {
    MarketDataError::Parse { path: path.display().to_string(), line, message: e.to_string() }
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("bad date '{s}': {e}"))
}

fn parse_num(s: &str, field: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad {field} '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite {field} '{s}'"));
    }
    Ok(v)
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), MarketDataError> {
    let got: Vec<&str> = found.iter().map(str::trim).collect();
    if got != expected {
        return Err(csv_err(path, 1, format!("expected header {}, found {}", expected.join(","), got.join(","))));
    }
    Ok(())
}

/// Loads one commodity's price file. The commodity id is the file stem and must
/// be present in `specs`.
pub fn load_chain(path: impl AsRef<Path>, specs: &SpecTable) -> Result<ContractChain, MarketDataError> {
    let path = path.as_ref();
    let commodity_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| MarketDataError::Config(format!("cannot derive commodity id from {}", path.display())))?
        .to_string();
    let spec = specs
        .get(&commodity_id)
        .ok_or_else(|| MarketDataError::UnknownCommodity(commodity_id.clone()))?
        .clone();

    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, 1, e))?.clone();
    check_header(path, &header, &PRICE_HEADER)?;

    let mut contracts: BTreeMap<String, ContractSeries> = BTreeMap::new();
    let mut seen: HashSet<(String, NaiveDate)> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_err(path, line, e)
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| csv_err(path, line, msg);
        if record.len() != PRICE_HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", PRICE_HEADER.len(), record.len())));
        }
        let date = parse_date(&record[0]).map_err(bad)?;
        let code = record[1].trim().to_string();
        if code.is_empty() {
            return Err(csv_err(path, line, "empty contract_code"));
        }
        let expiry = parse_date(&record[2]).map_err(|m| csv_err(path, line, m))?;
        let settle = parse_num(&record[3], "settle").map_err(|m| csv_err(path, line, m))?;
        let volume = parse_num(&record[4], "volume").map_err(|m| csv_err(path, line, m))?;
        let open_interest =
            parse_num(&record[5], "open_interest").map_err(|m| csv_err(path, line, m))?;
        if settle <= 0.0 {
            return Err(csv_err(path, line, format!("settle must be positive, got {settle}")));
        }
        if volume < 0.0 || open_interest < 0.0 {
            return Err(csv_err(path, line, "volume and open_interest must be non-negative"));
        }
        if date > expiry {
            return Err(csv_err(path, line, format!("row dated {date} is after contract expiry {expiry}")));
        }
        if !seen.insert((code.clone(), date)) {
            return Err(MarketDataError::Duplicate {
                path: path.display().to_string(),
                line,
                contract: code,
                date,
            });
        }
        let series = contracts.entry(code.clone()).or_insert_with(|| ContractSeries {
            commodity_id: commodity_id.clone(),
            contract_code: code.clone(),
            expiry,
            rows: Vec::new(),
        });
        if series.expiry != expiry {
            return Err(csv_err(
                path,
                line,
                format!("contract {code} has inconsistent expiry {expiry} (first seen {})", series.expiry),
            ));
        }
        if let Some(last) = series.rows.last() {
            if date <= last.date {
                return Err(csv_err(
                    path,
                    line,
                    format!("dates out of order for contract {code}: {date} after {}", last.date),
                ));
            }
        }
        series.rows.push(Bar { date, settle, volume, open_interest });
    }

    let mut contracts: Vec<ContractSeries> = contracts.into_values().collect();
    contracts.sort_by(|a, b| a.expiry.cmp(&b.expiry).then_with(|| a.contract_code.cmp(&b.contract_code)));
    Ok(ContractChain {
        commodity_id,
        sector: spec.sector,
        multiplier: spec.multiplier,
        tick_size: spec.tick_size,
        contracts,
    })
}

/// Loads every `*.csv` file in `dir` as a chain, sorted by commodity id.
pub fn load_chains_dir(dir: impl AsRef<Path>, specs: &SpecTable) -> Result<Vec<ContractChain>, MarketDataError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_chain(p, specs)).collect()
}

/// Writes a chain in the price CSV schema, ordered by date then expiry.
pub fn write_chain_csv(chain: &ContractChain, path: impl AsRef<Path>) -> Result<(), MarketDataError> {
    let path = path.as_ref();
    let mut rows: Vec<(NaiveDate, usize, usize)> = Vec::new();
    for (ci, c) in chain.contracts.iter().enumerate() {
        for (ri, b) in c.rows.iter().enumerate() {
            rows.push((b.date, ci, ri));
        }
    }
    rows.sort_unstable();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", PRICE_HEADER.join(",")).map_err(io_err(path))?;
    for (_, ci, ri) in rows {
        let c = &chain.contracts[ci];
        let b = &c.rows[ri];
        writeln!(out, "{},{},{},{},{},{}", b.date, c.contract_code, c.expiry, b.settle, b.volume, b.open_interest)
            .map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Loads a CoT file holding rows for any number of commodities.
pub fn load_cot(path: impl AsRef<Path>) -> Result<BTreeMap<String, CotSeries>, MarketDataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, 1, e))?.clone();
    check_header(path, &header, &COT_HEADER)?;
    let mut out: BTreeMap<String, CotSeries> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e.position().map(|p| p.line()).unwrap_or(0), e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != COT_HEADER.len() {
            return Err(csv_err(path, line, "wrong field count"));
        }
        let date = parse_date(&record[0]).map_err(|m| csv_err(path, line, m))?;
        let id = record[1].trim().to_string();
        let short = parse_num(&record[2], "commercial_short").map_err(|m| csv_err(path, line, m))?;
        let long = parse_num(&record[3], "commercial_long").map_err(|m| csv_err(path, line, m))?;
        if short < 0.0 || long < 0.0 {
            return Err(csv_err(path, line, "positions must be non-negative"));
        }
        let series = out
            .entry(id.clone())
            .or_insert_with(|| CotSeries { commodity_id: id.clone(), rows: Vec::new() });
        if series.rows.last().is_some_and(|r| r.date >= date) {
            return Err(csv_err(path, line, format!("CoT dates out of order for {id}")));
        }
        series.rows.push(CotRow { date, commercial_short: short, commercial_long: long });
    }
    Ok(out)
}

pub fn write_cot_csv(cot: &BTreeMap<String, CotSeries>, path: impl AsRef<Path>) -> Result<(), MarketDataError> {
    let path = path.as_ref();
    let mut rows: Vec<(NaiveDate, &str, f64, f64)> = cot
        .values()
        .flat_map(|s| s.rows.iter().map(move |r| (r.date, s.commodity_id.as_str(), r.commercial_short, r.commercial_long)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", COT_HEADER.join(",")).map_err(io_err(path))?;
    for (d, id, s, l) in rows {
        writeln!(out, "{d},{id},{s},{l}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> SpecTable {
        SpecTable::parse("[corn]\nsector = \"Grains\"\nmultiplier = 5000.0\ntick_size = 0.25\n").unwrap()
    }

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    const HEADER: &str = "date,contract_code,expiry_date,settle,volume,open_interest\n";

    #[test]
    fn loads_two_contracts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "corn.csv",
            &format!(
                "{HEADER}2024-01-02,H24,2024-03-14,450.0,100,1000\n2024-01-02,K24,2024-05-14,460.0,50,800\n2024-01-03,H24,2024-03-14,452.0,90,1010\n"
            ),
        );
        let chain = load_chain(&p, &specs()).unwrap();
        assert_eq!(chain.contracts.len(), 2);
        assert_eq!(chain.contracts[0].contract_code, "H24");
        assert_eq!(chain.contracts[0].rows.len(), 2);
        assert_eq!(chain.multiplier, 5000.0);
    }

    #[test]
    fn zero_settle_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "corn.csv", &format!("{HEADER}2024-01-02,H24,2024-03-14,450.0,1,1\n2024-01-03,H24,2024-03-14,0,1,1\n"));
        match load_chain(&p, &specs()) {
            Err(MarketDataError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_order_dates_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "corn.csv", &format!("{HEADER}2024-01-03,H24,2024-03-14,450.0,1,1\n2024-01-02,H24,2024-03-14,451.0,1,1\n"));
        assert!(matches!(load_chain(&p, &specs()), Err(MarketDataError::Parse { line: 3, .. })));
    }

    #[test]
    fn duplicate_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "corn.csv", &format!("{HEADER}2024-01-02,H24,2024-03-14,450.0,1,1\n2024-01-02,H24,2024-03-14,451.0,1,1\n"));
        assert!(matches!(load_chain(&p, &specs()), Err(MarketDataError::Duplicate { .. })));
    }

    #[test]
    fn unknown_commodity_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "wheat.csv", HEADER);
        assert!(matches!(load_chain(&p, &specs()), Err(MarketDataError::UnknownCommodity(_))));
    }

    #[test]
    fn rows_after_expiry_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "corn.csv", &format!("{HEADER}2024-03-15,H24,2024-03-14,450.0,1,1\n"));
        assert!(matches!(load_chain(&p, &specs()), Err(MarketDataError::Parse { .. })));
    }

    #[test]
    fn malformed_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "corn.csv", &format!("{HEADER}2024-01-02,H24,2024-03-14,abc,1,1\n"));
        let err = load_chain(&p, &specs()).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "corn.csv",
            &format!("{HEADER}2024-01-02,H24,2024-03-14,450.25,100,1000\n2024-01-02,K24,2024-05-14,460.5,50,800\n"),
        );
        let chain = load_chain(&p, &specs()).unwrap();
        let out = dir.path().join("out").join("corn.csv");
        std::fs::create_dir_all(out.parent().unwrap()).unwrap();
        write_chain_csv(&chain, &out).unwrap();
        assert_eq!(load_chain(&out, &specs()).unwrap(), chain);
    }

    #[test]
    fn cot_loads_per_commodity() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "cot.csv",
            "date,commodity_id,commercial_short,commercial_long\n2024-01-02,corn,60,40\n2024-01-02,wheat,10,10\n2024-01-09,corn,61,39\n",
        );
        let cot = load_cot(&p).unwrap();
        assert_eq!(cot["corn"].rows.len(), 2);
        assert_eq!(cot["wheat"].rows[0].commercial_long, 10.0);
    }
}
