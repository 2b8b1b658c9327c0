use curvespread::backtest::BacktestError;
use curvespread::marketdata::MarketDataError;
use curvespread::perfstats::StatsError;
use curvespread::portfolio::TimingError;

/// Failure classes mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<MarketDataError> for CliError {
    fn from(e: MarketDataError) -> Self {
        match e {
            MarketDataError::Config(m) => CliError::Validation(format!("marketdata: {m}")),
            other => CliError::Data(format!("marketdata: {other}")),
        }
    }
}

impl From<BacktestError> for CliError {
    fn from(e: BacktestError) -> Self {
        match e {
            BacktestError::MarketData(m) => m.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<TimingError> for CliError {
    fn from(e: TimingError) -> Self {
        CliError::Numerical(format!("portfolio: {e}"))
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
