//! Table-1 style summaries and per-run daily CSVs.

use std::path::Path;

use chrono::NaiveDate;

use super::{BacktestError, BacktestResult, DailySeries, Metrics, StrategySpec};
use crate::signals::SignalKind;

pub const SUMMARY_HEADER: &str = "Return,Classification,OPT/REG,Costs,ROC,Sharpe,CPC,Drawdown";
pub const DAILY_HEADER: &str = "date,pnl,traded_dollars,traded_shares";

/// Two decimals with trailing zeros dropped: `-8.70` → `-8.7`, `6.00` → `6`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return "n/a".into();
    }
    let s = format!("{x:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_else(|| "n/a".into())
}

/// The eight summary cells. Drawdown is reported for the close-to-close
/// mean-reversion rows only.
pub fn summary_row(spec: &StrategySpec, metrics: &Metrics) -> [String; 8] {
    let drawdown = match spec.kind {
        SignalKind::C2C(_) => format_opt(metrics.drawdown.map(|d| d.percent)),
        _ => "---".into(),
    };
    [
        spec.kind.to_string(),
        spec.classification.to_string(),
        spec.constructor.to_string(),
        if spec.costs { "Y" } else { "N" }.into(),
        format_number(metrics.roc),
        format_opt(metrics.sharpe),
        format_opt(metrics.cpc),
        drawdown,
    ]
}

pub fn write_summary_csv<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = (&'a StrategySpec, &'a Metrics)>,
) -> Result<(), BacktestError> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (spec, metrics) in rows {
        out.push_str(&summary_row(spec, metrics).join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_results_summary(path: &Path, results: &[BacktestResult]) -> Result<(), BacktestError> {
    write_summary_csv(path, results.iter().map(|r| (&r.spec, &r.metrics)))
}

/// Full-precision daily series; shortest round-trip float formatting keeps
/// reruns byte-identical.
pub fn write_daily_csv(path: &Path, series: &DailySeries) -> Result<(), BacktestError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DAILY_HEADER.split(','))?;
    for t in 0..series.dates.len() {
        w.write_record([
            series.dates[t].format("%Y-%m-%d").to_string(),
            series.pnl[t].to_string(),
            series.traded_dollars[t].to_string(),
            series.traded_shares[t].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_daily_csv(path: &Path) -> Result<DailySeries, BacktestError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != DAILY_HEADER {
        return Err(BacktestError::Params(format!(
            "{}: expected header `{DAILY_HEADER}`",
            path.display()
        )));
    }
    let mut series = DailySeries::default();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| {
            BacktestError::Params(format!("{}:{}: bad {what}", path.display(), line + 2))
        };
        let num = |k: usize, what: &str| {
            rec.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(what))
        };
        series.dates.push(
            rec.get(0)
                .and_then(|s| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok())
                .ok_or_else(|| bad("date"))?,
        );
        series.pnl.push(num(1, "pnl")?);
        series.traded_dollars.push(num(2, "traded_dollars")?);
        series.traded_shares.push(num(3, "traded_shares")?);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::{ClassificationChoice, Constructor};

    #[test]
    fn numbers_render_like_the_reference_table() {
        assert_eq!(format_number(-8.7), "-8.7");
        assert_eq!(format_number(-8.70001), "-8.7");
        assert_eq!(format_number(6.0), "6");
        assert_eq!(format_number(27.879), "27.88");
        assert_eq!(format_number(-0.001), "0");
        assert_eq!(format_number(f64::NAN), "n/a");
    }

    #[test]
    fn drawdown_column_only_for_close_to_close() {
        let m = Metrics {
            roc: -8.7,
            sharpe: None,
            cpc: Some(-0.47),
            drawdown: None,
        };
        let c2c = StrategySpec::new(
            SignalKind::C2C(1),
            ClassificationChoice::Fundamental,
            Constructor::Reg,
            false,
        );
        let row = summary_row(&c2c, &m);
        assert_eq!(row.join(","), "C2C1,SIC,REG,N,-8.7,n/a,-0.47,n/a");
        let d0 = StrategySpec {
            kind: SignalKind::D0,
            ..c2c
        };
        assert_eq!(summary_row(&d0, &m)[7], "---");
    }

    #[test]
    fn daily_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        let s = DailySeries {
            dates: vec![base, base + chrono::Days::new(1)],
            pnl: vec![0.1 + 0.2, -1234.5678],
            traded_dollars: vec![4e7, 3.9e7],
            traded_shares: vec![1e6 / 3.0, 0.0],
        };
        let p = dir.path().join("daily_pnl.csv");
        write_daily_csv(&p, &s).unwrap();
        assert_eq!(read_daily_csv(&p).unwrap(), s);
        assert!(std::fs::read_to_string(&p)
            .unwrap()
            .starts_with(DAILY_HEADER));
    }
}
