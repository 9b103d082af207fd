//! Return signals and refresh-frozen historical variances.
//!
//! Every signal for trading day `t` uses bars strictly before `t`, except
//! D0, which reads `t`'s own open. D0 is a delay-0 signal: it is computed
//! from today's open and traded at that same open, so it measures the pure
//! overnight alpha. A live strategy would have to trade after the open and
//! would see a much weaker signal.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::data::BarPanel;
use crate::stats;

/// Floor applied to daily return variances so inverse weights stay finite.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Which way a strategy trades its signal relative to the industry mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    MeanReversion,
    Momentum,
}

impl Direction {
    /// −1 for mean reversion (bet against the residual), +1 for momentum.
    pub fn sign(self) -> f64 {
        match self {
            Direction::MeanReversion => -1.0,
            Direction::Momentum => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalKind {
    /// Mean of the last `d` daily close-to-close returns ending at the previous close.
    C2C(usize),
    /// Previous day's open-to-close return.
    Mom1,
    /// Previous close to today's open.
    D0,
}

impl SignalKind {
    pub fn direction(self) -> Direction {
        match self {
            SignalKind::Mom1 => Direction::Momentum,
            SignalKind::C2C(_) | SignalKind::D0 => Direction::MeanReversion,
        }
    }

    /// Trading days of history before `t` the signal needs (closes included).
    pub fn history(self) -> usize {
        match self {
            SignalKind::C2C(d) => d + 1,
            SignalKind::Mom1 | SignalKind::D0 => 1,
        }
    }

    /// The six returns of the reference grid, in figure panel order.
    pub const GRID: [SignalKind; 6] = [
        SignalKind::C2C(20),
        SignalKind::C2C(10),
        SignalKind::C2C(5),
        SignalKind::C2C(1),
        SignalKind::Mom1,
        SignalKind::D0,
    ];
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::C2C(d) => write!(f, "C2C{d}"),
            SignalKind::Mom1 => f.write_str("MOM1"),
            SignalKind::D0 => f.write_str("D0"),
        }
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MOM1" => Ok(SignalKind::Mom1),
            "D0" => Ok(SignalKind::D0),
            other => other
                .strip_prefix("C2C")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|d| *d >= 1)
                .map(SignalKind::C2C)
                .ok_or_else(|| format!("unknown return kind `{s}`")),
        }
    }
}

/// Signal values for one trading day, aligned with the member list it was
/// computed for. `None` marks a member without the required history.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    pub asof: NaiveDate,
    pub kind: SignalKind,
    pub direction: Direction,
    pub values: Vec<Option<f64>>,
}

fn vector(panel: &BarPanel, t: usize, kind: SignalKind, values: Vec<Option<f64>>) -> SignalVector {
    SignalVector {
        asof: panel.calendar()[t],
        kind,
        direction: kind.direction(),
        values: values
            .into_iter()
            .map(|v| v.filter(|x| x.is_finite()))
            .collect(),
    }
}

/// Mean of the `d` most recent daily close-to-close returns ending at the close of `t - 1`.
pub fn c2c_signal(panel: &BarPanel, members: &[usize], t: usize, d: usize) -> SignalVector {
    let values = members
        .iter()
        .map(|&i| panel.trailing_returns(t, i, d).map(|r| stats::mean(&r)))
        .collect();
    vector(panel, t, SignalKind::C2C(d), values)
}

/// `(close − open) / open` of the previous trading day.
pub fn mom1_signal(panel: &BarPanel, members: &[usize], t: usize) -> SignalVector {
    let values = members
        .iter()
        .map(|&i| {
            let prev = t.checked_sub(1)?;
            let (o, c) = (panel.open(prev, i)?, panel.close(prev, i)?);
            Some((c - o) / o)
        })
        .collect();
    vector(panel, t, SignalKind::Mom1, values)
}

/// `(open − previous close) / previous close`, read at today's open.
pub fn d0_signal(panel: &BarPanel, members: &[usize], t: usize) -> SignalVector {
    let values = members
        .iter()
        .map(|&i| {
            let prev = t.checked_sub(1)?;
            let (pc, o) = (panel.close(prev, i)?, panel.open(t, i)?);
            Some((o - pc) / pc)
        })
        .collect();
    vector(panel, t, SignalKind::D0, values)
}

pub fn compute_signal(
    panel: &BarPanel,
    members: &[usize],
    t: usize,
    kind: SignalKind,
) -> SignalVector {
    match kind {
        SignalKind::C2C(d) => c2c_signal(panel, members, t, d),
        SignalKind::Mom1 => mom1_signal(panel, members, t),
        SignalKind::D0 => d0_signal(panel, members, t),
    }
}

/// Sample variance of the `lookback` daily close-to-close returns before `t`,
/// floored at [`VARIANCE_FLOOR`].
pub fn historical_variance(
    panel: &BarPanel,
    members: &[usize],
    t: usize,
    lookback: usize,
) -> Vec<Option<f64>> {
    members
        .iter()
        .map(|&i| {
            let r = panel.trailing_returns(t, i, lookback)?;
            let v = stats::sample_variance(&r);
            v.is_finite().then(|| v.max(VARIANCE_FLOOR))
        })
        .collect()
}
