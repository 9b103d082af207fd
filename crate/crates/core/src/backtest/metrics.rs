//! Performance metrics on a daily P&L series with a fixed capital base.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("empty P&L series")]
    Empty,
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("drawdown window {0} .. {1} contains no dates of the series")]
    EmptyWindow(NaiveDate, NaiveDate),
    #[error("series lengths differ: {0} vs {1}")]
    Length(usize, usize),
}

/// Annualized return on capital, in percent.
pub fn roc(pnl: &[f64], capital: f64) -> Result<f64, MetricError> {
    if pnl.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(stats::mean(pnl) * TRADING_DAYS_PER_YEAR / capital * 100.0)
}

/// Annualized Sharpe ratio; `None` when the P&L has zero dispersion.
pub fn sharpe(pnl: &[f64]) -> Result<Option<f64>, MetricError> {
    if pnl.len() < 2 {
        return Err(MetricError::TooShort(pnl.len()));
    }
    let sd = stats::sample_std(pnl);
    if !(sd > 0.0) {
        return Ok(None);
    }
    Ok(Some(stats::mean(pnl) / sd * TRADING_DAYS_PER_YEAR.sqrt()))
}

/// Total P&L in cents per share traded; `None` when nothing traded.
pub fn cps(pnl: &[f64], shares: &[f64]) -> Option<f64> {
    let total_shares: f64 = shares.iter().sum();
    if !(total_shares > 0.0) {
        return None;
    }
    Some(pnl.iter().sum::<f64>() * 100.0 / total_shares)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drawdown {
    /// Peak-to-trough loss of cumulative P&L, percent of capital.
    pub percent: f64,
    /// End of the day at which the peak was set; `None` when the peak is the
    /// level carried into the window.
    pub peak: Option<NaiveDate>,
    /// `None` when there is no loss in the window.
    pub trough: Option<NaiveDate>,
    pub window: (NaiveDate, NaiveDate),
}

/// Largest peak-to-trough fall of cumulative P&L over the series positions
/// in `range`. The cumulative level entering the range counts as a peak.
/// Returns the fall in currency and the `(peak, trough)` positions, where a
/// peak of `None` is the entering level.
pub fn max_drawdown(
    pnl: &[f64],
    range: std::ops::Range<usize>,
) -> (f64, Option<(Option<usize>, usize)>) {
    let mut cum: f64 = pnl[..range.start].iter().sum();
    let mut peak = cum;
    let mut peak_at: Option<usize> = None;
    let mut best = 0.0;
    let mut at = None;
    for t in range {
        cum += pnl[t];
        if peak - cum > best {
            best = peak - cum;
            at = Some((peak_at, t));
        }
        if cum > peak {
            peak = cum;
            peak_at = Some(t);
        }
    }
    (best, at)
}

/// Drawdown of cumulative P&L within `[window.0, window.1]`, percent of capital.
pub fn drawdown(
    dates: &[NaiveDate],
    pnl: &[f64],
    window: (NaiveDate, NaiveDate),
    capital: f64,
) -> Result<Drawdown, MetricError> {
    if dates.len() != pnl.len() {
        return Err(MetricError::Length(dates.len(), pnl.len()));
    }
    let lo = dates.partition_point(|d| *d < window.0);
    let hi = dates.partition_point(|d| *d <= window.1);
    if lo >= hi {
        return Err(MetricError::EmptyWindow(window.0, window.1));
    }
    let (fall, at) = max_drawdown(pnl, lo..hi);
    Ok(Drawdown {
        percent: fall / capital * 100.0,
        peak: at.and_then(|(p, _)| p.map(|p| dates[p])),
        trough: at.map(|(_, t)| dates[t]),
        window,
    })
}

/// The four Table-1 statistics for one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub roc: f64,
    pub sharpe: Option<f64>,
    pub cpc: Option<f64>,
    /// `None` when the series does not reach the drawdown window.
    pub drawdown: Option<Drawdown>,
}

impl Metrics {
    pub fn compute(
        dates: &[NaiveDate],
        pnl: &[f64],
        shares: &[f64],
        capital: f64,
        window: Option<(NaiveDate, NaiveDate)>,
    ) -> Result<Self, MetricError> {
        if shares.len() != pnl.len() {
            return Err(MetricError::Length(pnl.len(), shares.len()));
        }
        let drawdown = match window {
            Some(w) => match drawdown(dates, pnl, w, capital) {
                Ok(d) => Some(d),
                Err(MetricError::EmptyWindow(..)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        Ok(Metrics {
            roc: roc(pnl, capital)?,
            sharpe: sharpe(pnl)?,
            cpc: cps(pnl, shares),
            drawdown,
        })
    }
}
