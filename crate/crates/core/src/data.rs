//! Daily bar ingestion, the trading calendar, ADDV and universe selection.
//!
//! Bars are stored date-major in dense arrays with `NaN` marking an absent
//! cell. Absent cells are never zero-filled; every consumer asks for an
//! `Option` and drops the ticker from whatever it is computing.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

/// Errors raised while loading bars or deriving universes from them.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("{path}:{line}: duplicate bar for ({date}, {ticker})")]
    Duplicate {
        path: PathBuf,
        line: u64,
        date: NaiveDate,
        ticker: String,
    },
    #[error("ticker {ticker} reappears on {date} after a gap in its bar history")]
    NonContiguous { ticker: String, date: NaiveDate },
    #[error("bar panel is empty")]
    Empty,
    #[error("date {0} is not in the trading calendar")]
    UnknownDate(NaiveDate),
    #[error("calendar has {available} dates, need {required}")]
    ShortCalendar { required: usize, available: usize },
    #[error("only {eligible} tickers are eligible on {date}; dollar neutrality needs at least 2")]
    TooFewEligible { date: NaiveDate, eligible: usize },
    #[error("invalid panel: {0}")]
    Invalid(String),
}

/// One row of the bar file format: `date,ticker,open,close,volume`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub ticker: String,
    pub open: f64,
    pub close: f64,
    pub volume: f64,
}

/// Header of the bar CSV format.
pub const BAR_HEADER: [&str; 5] = ["date", "ticker", "open", "close", "volume"];

/// How a bar source on disk is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarFormat {
    /// A single CSV file with [`BAR_HEADER`].
    Csv,
    /// A text file listing one CSV path per line (relative paths resolve
    /// against the manifest's directory; blank lines and `#` comments skipped).
    Manifest,
}

impl BarFormat {
    /// `.csv` files are read directly, anything else is treated as a manifest.
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => BarFormat::Csv,
            _ => BarFormat::Manifest,
        }
    }
}

/// Aligned open/close/volume panel over a trading calendar and ticker set.
#[derive(Debug, Clone, PartialEq)]
pub struct BarPanel {
    calendar: Vec<NaiveDate>,
    tickers: Vec<String>,
    open: Vec<f64>,
    close: Vec<f64>,
    volume: Vec<f64>,
}

impl BarPanel {
    /// Builds a panel from date-major arrays (`NaN` = absent) and validates
    /// every invariant: strictly increasing dates, positive prices,
    /// non-negative volumes, matching presence across the three fields and
    /// contiguous per-ticker history.
    pub fn new(
        calendar: Vec<NaiveDate>,
        tickers: Vec<String>,
        open: Vec<f64>,
        close: Vec<f64>,
        volume: Vec<f64>,
    ) -> Result<Self, DataError> {
        let cells = calendar.len() * tickers.len();
        if cells == 0 {
            return Err(DataError::Empty);
        }
        if open.len() != cells || close.len() != cells || volume.len() != cells {
            return Err(DataError::Invalid(format!(
                "expected {cells} cells per field, got open={} close={} volume={}",
                open.len(),
                close.len(),
                volume.len()
            )));
        }
        if calendar.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DataError::Invalid(
                "dates must be strictly increasing".into(),
            ));
        }
        let panel = BarPanel {
            calendar,
            tickers,
            open,
            close,
            volume,
        };
        panel.validate()?;
        Ok(panel)
    }

    fn validate(&self) -> Result<(), DataError> {
        let n = self.tickers.len();
        for (i, ticker) in self.tickers.iter().enumerate() {
            let mut seen = false;
            let mut ended = false;
            for t in 0..self.calendar.len() {
                let k = t * n + i;
                let (o, c, v) = (self.open[k], self.close[k], self.volume[k]);
                let present = !o.is_nan();
                if present != !c.is_nan() || present != !v.is_nan() {
                    return Err(DataError::Invalid(format!(
                        "{ticker} on {}: open/close/volume presence differs",
                        self.calendar[t]
                    )));
                }
                if present {
                    if !(o > 0.0 && c > 0.0 && o.is_finite() && c.is_finite()) {
                        return Err(DataError::Invalid(format!(
                            "{ticker} on {}: prices must be positive and finite",
                            self.calendar[t]
                        )));
                    }
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(DataError::Invalid(format!(
                            "{ticker} on {}: volume must be non-negative",
                            self.calendar[t]
                        )));
                    }
                    if ended {
                        return Err(DataError::NonContiguous {
                            ticker: ticker.clone(),
                            date: self.calendar[t],
                        });
                    }
                    seen = true;
                } else if seen {
                    ended = true;
                }
            }
        }
        Ok(())
    }

    /// Aligns a set of bars onto the union calendar and ticker set.
    /// Dates and tickers are sorted; tickers without bars cannot appear.
    pub fn from_bars(bars: &[Bar]) -> Result<Self, DataError> {
        if bars.is_empty() {
            return Err(DataError::Empty);
        }
        let calendar: Vec<NaiveDate> = bars
            .iter()
            .map(|b| b.date)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let tickers: Vec<String> = bars
            .iter()
            .map(|b| b.ticker.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let date_pos: HashMap<NaiveDate, usize> =
            calendar.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        let ticker_pos: HashMap<&str, usize> = tickers
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let n = tickers.len();
        let cells = calendar.len() * n;
        let mut open = vec![f64::NAN; cells];
        let mut close = vec![f64::NAN; cells];
        let mut volume = vec![f64::NAN; cells];
        for b in bars {
            let k = date_pos[&b.date] * n + ticker_pos[b.ticker.as_str()];
            if !open[k].is_nan() {
                return Err(DataError::Invalid(format!(
                    "duplicate bar for ({}, {})",
                    b.date, b.ticker
                )));
            }
            open[k] = b.open;
            close[k] = b.close;
            volume[k] = b.volume;
        }
        BarPanel::new(calendar, tickers, open, close, volume)
    }

    pub fn calendar(&self) -> &[NaiveDate] {
        &self.calendar
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n_dates(&self) -> usize {
        self.calendar.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.calendar.binary_search(&date).ok()
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers
            .binary_search_by(|t| t.as_str().cmp(ticker))
            .ok()
            .or_else(|| self.tickers.iter().position(|t| t == ticker))
    }

    fn cell(&self, field: &[f64], t: usize, i: usize) -> Option<f64> {
        let v = field[t * self.tickers.len() + i];
        (!v.is_nan()).then_some(v)
    }

    pub fn open(&self, t: usize, i: usize) -> Option<f64> {
        self.cell(&self.open, t, i)
    }

    pub fn close(&self, t: usize, i: usize) -> Option<f64> {
        self.cell(&self.close, t, i)
    }

    pub fn volume(&self, t: usize, i: usize) -> Option<f64> {
        self.cell(&self.volume, t, i)
    }

    pub fn is_present(&self, t: usize, i: usize) -> bool {
        !self.open[t * self.tickers.len() + i].is_nan()
    }

    /// Close-to-close return ending at the close of date `t`.
    pub fn close_return(&self, t: usize, i: usize) -> Option<f64> {
        if t == 0 {
            return None;
        }
        Some(self.close(t, i)? / self.close(t - 1, i)? - 1.0)
    }

    /// The `count` close-to-close returns ending at the close of `t - 1`,
    /// oldest first. `None` if any close in the span is absent.
    pub fn trailing_returns(&self, t: usize, i: usize, count: usize) -> Option<Vec<f64>> {
        if t < count + 1 {
            return None;
        }
        (t - count..t).map(|s| self.close_return(s, i)).collect()
    }

    /// Bars in file order (date-major, tickers sorted), skipping absent cells.
    pub fn bars(&self) -> impl Iterator<Item = Bar> + '_ {
        let n = self.tickers.len();
        (0..self.calendar.len()).flat_map(move |t| {
            (0..n).filter_map(move |i| {
                Some(Bar {
                    date: self.calendar[t],
                    ticker: self.tickers[i].clone(),
                    open: self.open(t, i)?,
                    close: self.close(t, i)?,
                    volume: self.volume(t, i)?,
                })
            })
        })
    }

    /// Writes the panel in the bar CSV format.
    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let io = |source| DataError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        for bar in self.bars() {
            w.serialize(bar).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

/// Loads bars from `source`, which is either one CSV or a manifest of CSVs.
pub fn load_bars(source: &Path, format: BarFormat) -> Result<BarPanel, DataError> {
    match format {
        BarFormat::Csv => load_bar_files(&[source.to_path_buf()]),
        BarFormat::Manifest => load_bar_files(&read_manifest(source)?),
    }
}

fn read_manifest(path: &Path) -> Result<Vec<PathBuf>, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let p = Path::new(entry);
        out.push(if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        });
    }
    Ok(out)
}

/// Reads and aligns several bar CSVs. Duplicate `(date, ticker)` pairs are
/// an error even when they sit in different files.
pub fn load_bar_files(paths: &[PathBuf]) -> Result<BarPanel, DataError> {
    let mut bars = Vec::new();
    let mut origin: HashMap<(NaiveDate, String), ()> = HashMap::new();
    for path in paths {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| DataError::Io {
                path: path.clone(),
                source: e.into(),
            })?;
        let headers = reader.headers().map_err(|e| DataError::Parse {
            path: path.clone(),
            line: 1,
            msg: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != BAR_HEADER {
            return Err(DataError::Parse {
                path: path.clone(),
                line: 1,
                msg: format!("expected header `{}`", BAR_HEADER.join(",")),
            });
        }
        for record in reader.records() {
            let record = record.map_err(|e| DataError::Parse {
                path: path.clone(),
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bar: Bar = record.deserialize(None).map_err(|e| DataError::Parse {
                path: path.clone(),
                line,
                msg: e.to_string(),
            })?;
            let bad = |msg: &str| DataError::Parse {
                path: path.clone(),
                line,
                msg: msg.to_string(),
            };
            if !(bar.open > 0.0 && bar.open.is_finite())
                || !(bar.close > 0.0 && bar.close.is_finite())
            {
                return Err(bad("open and close must be positive"));
            }
            if !(bar.volume >= 0.0 && bar.volume.is_finite()) {
                return Err(bad("volume must be non-negative"));
            }
            if origin.insert((bar.date, bar.ticker.clone()), ()).is_some() {
                return Err(DataError::Duplicate {
                    path: path.clone(),
                    line,
                    date: bar.date,
                    ticker: bar.ticker,
                });
            }
            bars.push(bar);
        }
    }
    BarPanel::from_bars(&bars)
}

/// Mean of close×volume over the `lookback` days ending the day before `t`.
/// A ticker with any absent bar in the window, or with too little history,
/// gets `None`.
pub fn compute_addv_at(panel: &BarPanel, t: usize, lookback: usize) -> Vec<Option<f64>> {
    (0..panel.n_tickers())
        .map(|i| {
            if lookback == 0 || t < lookback || t > panel.n_dates() {
                return None;
            }
            let mut sum = 0.0;
            for s in t - lookback..t {
                sum += panel.close(s, i)? * panel.volume(s, i)?;
            }
            Some(sum / lookback as f64)
        })
        .collect()
}

/// [`compute_addv_at`] addressed by date.
pub fn compute_addv(
    panel: &BarPanel,
    asof: NaiveDate,
    lookback: usize,
) -> Result<Vec<Option<f64>>, DataError> {
    let t = panel.date_index(asof).ok_or(DataError::UnknownDate(asof))?;
    Ok(compute_addv_at(panel, t, lookback))
}

/// The trading universe for one refresh period.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub effective_start: NaiveDate,
    /// Number of trading days the universe stays in force.
    pub effective_length: usize,
    pub members: Vec<String>,
    /// Panel column of each member.
    pub indices: Vec<usize>,
    /// Average daily dollar volume per member, dollars/day.
    pub addv: Vec<f64>,
    /// Sample variance of daily close-to-close returns per member.
    pub sigma2: Vec<f64>,
}

impl Universe {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position (and trading) bound per member: `fraction × ADDV`.
    pub fn bounds(&self, fraction: f64) -> Vec<f64> {
        self.addv.iter().map(|a| fraction * a).collect()
    }
}

/// Top-`size` tickers by ADDV at calendar position `t`.
///
/// Eligible tickers have every bar over the `lookback` window plus the close
/// before it, so that both ADDV and the `lookback` daily returns behind
/// `sigma2` exist. Ties in ADDV go to the lexicographically smaller ticker.
pub fn select_universe_at(
    panel: &BarPanel,
    t: usize,
    size: usize,
    lookback: usize,
) -> Result<Universe, DataError> {
    if t >= panel.n_dates() {
        return Err(DataError::Invalid(format!("date index {t} out of range")));
    }
    let addv = compute_addv_at(panel, t, lookback);
    let mut eligible: Vec<(usize, f64, Vec<f64>)> = addv
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let a = (*a)?;
            if a <= 0.0 {
                return None;
            }
            let returns = panel.trailing_returns(t, i, lookback)?;
            Some((i, a, returns))
        })
        .collect();
    if eligible.len() < 2 {
        return Err(DataError::TooFewEligible {
            date: panel.calendar()[t],
            eligible: eligible.len(),
        });
    }
    let tickers = panel.tickers();
    eligible.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| tickers[a.0].cmp(&tickers[b.0]))
    });
    eligible.truncate(size);
    Ok(Universe {
        effective_start: panel.calendar()[t],
        effective_length: lookback,
        members: eligible.iter().map(|e| tickers[e.0].clone()).collect(),
        indices: eligible.iter().map(|e| e.0).collect(),
        addv: eligible.iter().map(|e| e.1).collect(),
        sigma2: eligible
            .iter()
            .map(|e| stats::sample_variance(&e.2))
            .collect(),
    })
}

/// [`select_universe_at`] addressed by date.
pub fn select_universe(
    panel: &BarPanel,
    asof: NaiveDate,
    size: usize,
    lookback: usize,
) -> Result<Universe, DataError> {
    let t = panel.date_index(asof).ok_or(DataError::UnknownDate(asof))?;
    select_universe_at(panel, t, size, lookback)
}

/// Calendar position of the first day of the backtest window, which is the
/// last `backtest_days` dates of the calendar.
pub fn backtest_start(n_dates: usize, backtest_days: usize) -> Result<usize, DataError> {
    if backtest_days == 0 || backtest_days > n_dates {
        return Err(DataError::ShortCalendar {
            required: backtest_days.max(1),
            available: n_dates,
        });
    }
    Ok(n_dates - backtest_days)
}

/// Refresh dates for a backtest over the last `backtest_days` of `calendar`:
/// the window start and every `period` trading days after it.
pub fn rebalance_schedule(
    calendar: &[NaiveDate],
    backtest_days: usize,
    period: usize,
) -> Result<Vec<NaiveDate>, DataError> {
    if period == 0 {
        return Err(DataError::Invalid("refresh period must be positive".into()));
    }
    let start = backtest_start(calendar.len(), backtest_days)?;
    Ok(calendar[start..].iter().step_by(period).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(day as u64)
    }

    fn bar(day: u32, ticker: &str, close: f64, volume: f64) -> Bar {
        Bar {
            date: d(day),
            ticker: ticker.into(),
            open: close,
            close,
            volume,
        }
    }

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn single_ticker_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "date,ticker,open,close,volume\n2020-01-02,A,10,11,100\n2020-01-03,A,11,12,100\n2020-01-06,A,12,13,100\n",
        );
        let panel = load_bars(&p, BarFormat::Csv).unwrap();
        assert_eq!(panel.n_dates(), 3);
        assert_eq!(panel.n_tickers(), 1);
        assert_eq!(panel.close(2, 0), Some(13.0));
    }

    #[test]
    fn manifest_unions_disjoint_tickers() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "a.csv",
            "date,ticker,open,close,volume\n2020-01-02,A,10,11,100\n2020-01-03,A,11,12,100\n",
        );
        write(
            dir.path(),
            "b.csv",
            "date,ticker,open,close,volume\n2020-01-02,B,5,6,10\n2020-01-03,B,6,7,10\n",
        );
        let m = write(dir.path(), "bars.manifest", "# two files\na.csv\n\nb.csv\n");
        assert_eq!(BarFormat::detect(&m), BarFormat::Manifest);
        let panel = load_bars(&m, BarFormat::detect(&m)).unwrap();
        assert_eq!(panel.n_dates(), 2);
        assert_eq!(panel.tickers(), &["A".to_string(), "B".to_string()]);
        assert_eq!(panel.open(1, 1), Some(6.0));
    }

    #[test]
    fn negative_volume_is_rejected_with_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "date,ticker,open,close,volume\n2020-01-02,A,10,11,100\n2020-01-03,A,11,12,-5\n",
        );
        let err = load_bars(&p, BarFormat::Csv).unwrap_err();
        match err {
            DataError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unparseable_and_duplicate_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "date,ticker,open,close,volume\n2020-01-02,A,ten,11,100\n",
        );
        assert!(matches!(
            load_bars(&p, BarFormat::Csv),
            Err(DataError::Parse { line: 2, .. })
        ));
        let p = write(
            dir.path(),
            "b.csv",
            "date,ticker,open,close,volume\n2020-01-02,A,10,11,100\n2020-01-02,A,10,11,100\n",
        );
        assert!(matches!(
            load_bars(&p, BarFormat::Csv),
            Err(DataError::Duplicate { line: 3, .. })
        ));
    }

    #[test]
    fn resurrected_ticker_is_rejected() {
        let bars = vec![
            bar(0, "A", 10.0, 1.0),
            bar(0, "B", 10.0, 1.0),
            bar(1, "B", 10.0, 1.0),
            bar(2, "A", 10.0, 1.0),
            bar(2, "B", 10.0, 1.0),
        ];
        assert!(matches!(
            BarPanel::from_bars(&bars),
            Err(DataError::NonContiguous { .. })
        ));
    }

    #[test]
    fn addv_constant_case() {
        let bars: Vec<Bar> = (0..22).map(|t| bar(t, "A", 10.0, 1000.0)).collect();
        let panel = BarPanel::from_bars(&bars).unwrap();
        assert_eq!(compute_addv_at(&panel, 21, 21), vec![Some(10_000.0)]);
        // 20 prior days only
        assert_eq!(compute_addv_at(&panel, 20, 21), vec![None]);
    }

    #[test]
    fn addv_missing_day_in_window_is_absent() {
        let mut bars: Vec<Bar> = (0..22).map(|t| bar(t, "A", 10.0, 1000.0)).collect();
        // B starts one day into A's window
        bars.extend((1..22).map(|t| bar(t, "B", 10.0, 1000.0)));
        let panel = BarPanel::from_bars(&bars).unwrap();
        assert_eq!(compute_addv_at(&panel, 21, 21), vec![Some(10_000.0), None]);
        assert_eq!(compute_addv_at(&panel, 22, 21)[1], Some(10_000.0));
    }

    #[test]
    fn universe_top_k_and_tie_break() {
        let mut bars = Vec::new();
        for t in 0..23 {
            bars.push(bar(t, "C", 10.0, 300.0));
            bars.push(bar(t, "A", 10.0, 100.0 + t as f64));
            bars.push(bar(t, "B", 10.0, 200.0));
        }
        let panel = BarPanel::from_bars(&bars).unwrap();
        let u = select_universe_at(&panel, 22, 2, 21).unwrap();
        assert_eq!(u.members, vec!["C", "B"]);
        assert!(u.addv[0] >= u.addv[1]);

        let equal: Vec<Bar> = ["D", "B", "C", "A"]
            .iter()
            .flat_map(|tk| (0..23).map(move |t| bar(t, tk, 10.0, 50.0)))
            .collect();
        let panel = BarPanel::from_bars(&equal).unwrap();
        let u = select_universe_at(&panel, 22, 3, 21).unwrap();
        assert_eq!(u.members, vec!["A", "B", "C"]);
        assert_eq!(u.effective_start, d(22));
    }

    #[test]
    fn universe_needs_two_eligible() {
        let bars: Vec<Bar> = (0..23).map(|t| bar(t, "A", 10.0, 1.0)).collect();
        let panel = BarPanel::from_bars(&bars).unwrap();
        assert!(matches!(
            select_universe_at(&panel, 22, 10, 21),
            Err(DataError::TooFewEligible { eligible: 1, .. })
        ));
    }

    #[test]
    fn schedule_counts() {
        let cal: Vec<NaiveDate> = (0..300).map(d).collect();
        assert_eq!(rebalance_schedule(&cal, 252, 21).unwrap().len(), 12);
        assert_eq!(rebalance_schedule(&cal, 21, 21).unwrap().len(), 1);
        let s = rebalance_schedule(&cal, 22, 21).unwrap();
        assert_eq!(s, vec![d(278), d(299)]);
        assert!(rebalance_schedule(&cal, 301, 21).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let bars: Vec<Bar> = (0..5)
            .flat_map(|t| vec![bar(t, "A", 10.0 + t as f64, 5.0), bar(t, "B", 3.0, 7.0)])
            .collect();
        let panel = BarPanel::from_bars(&bars).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        panel.write_csv(&p).unwrap();
        assert_eq!(load_bars(&p, BarFormat::Csv).unwrap(), panel);
    }
}
