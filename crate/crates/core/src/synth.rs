//! Seeded synthetic markets with a normal regime and a selloff regime.
//!
//! Daily return of ticker `i` in industry `A(i)`:
//! `r = β_i·m + γ_i·g_A + u_i`, with `u` an AR(1) residual of coefficient
//! `φ`. Open and close both hang off the previous close: the open carries a
//! `split` share of the day's return plus overnight noise, the close the
//! whole return. In the selloff regime the market drifts down, every
//! volatility is multiplied, industries pick up persistent drifts, residual
//! mean reversion switches to `selloff_phi`, and a fraction of tickers take
//! their factor exposure from a different industry than their label.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{Classification, ClassificationKind, ClassifyError};
use crate::data::{BarPanel, DataError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Normal,
    Selloff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub tickers: usize,
    /// Industries get sizes as equal as possible.
    pub industries: usize,
    pub market_vol: f64,
    pub industry_vol: f64,
    /// Stationary standard deviation of the residual.
    pub idio_vol: f64,
    pub phi: f64,
    /// Share of the day's return realized overnight (before the open).
    pub split: f64,
    /// Standard deviation of open noise that the close does not carry.
    pub overnight_noise: f64,
    pub normal_days: usize,
    pub selloff_days: usize,
    /// Last calendar date; dates are weekdays counted back from here.
    pub end_date: NaiveDate,
    pub selloff_drift: f64,
    pub selloff_vol_multiplier: f64,
    pub scramble_fraction: f64,
    /// Standard deviation of the per-industry daily drift in the selloff.
    pub selloff_industry_drift: f64,
    pub selloff_phi: f64,
    /// Exposures `β` and `γ` are uniform on `[1 − spread, 1 + spread]`.
    pub exposure_spread: f64,
    pub median_price: f64,
    pub median_volume: f64,
    /// Log-scale dispersion of starting prices and volumes.
    pub log_dispersion: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tickers: 200,
            industries: 20,
            market_vol: 0.01,
            industry_vol: 0.01,
            idio_vol: 0.02,
            phi: -0.3,
            split: 0.3,
            overnight_noise: 0.003,
            normal_days: 282,
            selloff_days: 23,
            end_date: NaiveDate::from_ymd_opt(2020, 3, 23).expect("valid date"),
            selloff_drift: -0.02,
            selloff_vol_multiplier: 3.0,
            scramble_fraction: 0.5,
            selloff_industry_drift: 0.0125,
            selloff_phi: 0.0,
            exposure_spread: 0.25,
            median_price: 50.0,
            median_volume: 5e5,
            log_dispersion: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn days(&self) -> usize {
        self.normal_days + self.selloff_days
    }

    pub fn regimes(&self) -> Vec<Regime> {
        let mut r = vec![Regime::Normal; self.normal_days];
        r.resize(self.days(), Regime::Selloff);
        r
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.into()));
        if self.tickers == 0 || self.industries == 0 || self.industries > self.tickers {
            return bad("need 1 ≤ industries ≤ tickers");
        }
        if self.days() == 0 {
            return bad("need at least one day");
        }
        for v in [
            self.market_vol,
            self.industry_vol,
            self.idio_vol,
            self.overnight_noise,
            self.selloff_vol_multiplier,
            self.selloff_industry_drift,
            self.log_dispersion,
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad("volatilities and multipliers must be non-negative");
            }
        }
        if !(self.phi.abs() < 1.0 && self.selloff_phi.abs() < 1.0) {
            return bad("|phi| must be below 1");
        }
        if !(0.0..=1.0).contains(&self.split) || !(0.0..=1.0).contains(&self.scramble_fraction) {
            return bad("split and scramble fraction must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.exposure_spread) {
            return bad("exposure spread must lie in [0, 1)");
        }
        if !(self.median_price > 0.0 && self.median_volume > 0.0) {
            return bad("median price and volume must be positive");
        }
        Ok(())
    }
}

/// A generated panel with its planted industry labels and regime per date.
#[derive(Debug, Clone)]
pub struct SynthMarket {
    pub panel: BarPanel,
    pub labels: Classification,
    pub regimes: Vec<Regime>,
}

impl SynthMarket {
    /// Calendar positions of the first and last selloff days.
    pub fn selloff_range(&self) -> Option<(usize, usize)> {
        let first = self.regimes.iter().position(|r| *r == Regime::Selloff)?;
        let last = self.regimes.iter().rposition(|r| *r == Regime::Selloff)?;
        Some((first, last))
    }
}

/// The `n` weekdays ending at `end` (inclusive if `end` is a weekday).
pub fn business_days_ending(end: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = end;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.pred_opt().expect("date in range");
    }
    out.reverse();
    out
}

fn industry_of(i: usize, tickers: usize, industries: usize) -> usize {
    // First `tickers % industries` industries take one extra member.
    let base = tickers / industries;
    let extra = tickers % industries;
    let cut = extra * (base + 1);
    if i < cut {
        i / (base + 1)
    } else {
        extra + (i - cut) / base
    }
}

pub fn generate_market(config: &SynthConfig) -> Result<SynthMarket, SynthError> {
    config.validate()?;
    let n = config.tickers;
    let k = config.industries;
    let days = config.days();
    let regimes = config.regimes();
    let calendar = business_days_ending(config.end_date, days);
    let width = n.to_string().len().max(4);
    let tickers: Vec<String> = (0..n).map(|i| format!("T{:0width$}", i + 1)).collect();
    let industry: Vec<usize> = (0..n).map(|i| industry_of(i, n, k)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lo = 1.0 - config.exposure_spread;
    let hi = 1.0 + config.exposure_spread;
    let draw_exposure = |rng: &mut ChaCha8Rng| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            1.0
        }
    };
    let beta: Vec<f64> = (0..n).map(|_| draw_exposure(&mut rng)).collect();
    let gamma: Vec<f64> = (0..n).map(|_| draw_exposure(&mut rng)).collect();
    let lognormal = |rng: &mut ChaCha8Rng, median: f64| {
        let z: f64 = StandardNormal.sample(rng);
        median * (config.log_dispersion * z).exp()
    };
    let volume: Vec<f64> = (0..n)
        .map(|_| lognormal(&mut rng, config.median_volume).round().max(1.0))
        .collect();
    let mut prev_close: Vec<f64> = (0..n)
        .map(|_| lognormal(&mut rng, config.median_price))
        .collect();
    let mut u: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            config.idio_vol * z
        })
        .collect();

    // Selloff parameters come from their own stream so that pre-selloff bars
    // do not depend on whether a selloff follows.
    let mut selloff_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5e11_0ff5_eed0_0001);
    let mut exposure_industry = industry.clone();
    let mut industry_drift = vec![0.0; k];
    let mut selloff_started = false;

    let cells = days * n;
    let (mut open, mut close, mut vol) = (vec![0.0; cells], vec![0.0; cells], vec![0.0; cells]);
    let mut g = vec![0.0; k];
    for (t, regime) in regimes.iter().enumerate() {
        let selloff = *regime == Regime::Selloff;
        if selloff && !selloff_started {
            selloff_started = true;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut selloff_rng);
            let moved = (config.scramble_fraction * n as f64).round() as usize;
            for &i in order.iter().take(moved) {
                if k > 1 {
                    let other = selloff_rng.random_range(0..k - 1);
                    exposure_industry[i] = if other >= industry[i] {
                        other + 1
                    } else {
                        other
                    };
                }
            }
            if config.selloff_industry_drift > 0.0 {
                let d = Normal::new(0.0, config.selloff_industry_drift).expect("valid sd");
                industry_drift
                    .iter_mut()
                    .for_each(|x| *x = d.sample(&mut selloff_rng));
            }
        }
        let (mult, phi, drift) = if selloff {
            (
                config.selloff_vol_multiplier,
                config.selloff_phi,
                config.selloff_drift,
            )
        } else {
            (1.0, config.phi, 0.0)
        };
        let zm: f64 = StandardNormal.sample(&mut rng);
        let m = drift + mult * config.market_vol * zm;
        for (a, ga) in g.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *ga = mult * config.industry_vol * z + if selloff { industry_drift[a] } else { 0.0 };
        }
        let innovation = mult * config.idio_vol * (1.0 - phi * phi).sqrt();
        for i in 0..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            let eta: f64 = StandardNormal.sample(&mut rng);
            u[i] = phi * u[i] + innovation * e;
            let r = (beta[i] * m + gamma[i] * g[exposure_industry[i]] + u[i]).max(-0.9);
            let o =
                prev_close[i] * (1.0 + config.split * r + config.overnight_noise * eta).max(0.05);
            let c = prev_close[i] * (1.0 + r);
            let cell = t * n + i;
            open[cell] = o;
            close[cell] = c;
            vol[cell] = volume[i];
            prev_close[i] = c;
        }
    }
    let panel = BarPanel::new(calendar, tickers.clone(), open, close, vol)?;
    let labels = Classification::new(
        ClassificationKind::Fundamental,
        tickers,
        vec![industry.iter().map(|&a| a as u32 + 1).collect()],
    )?;
    Ok(SynthMarket {
        panel,
        labels,
        regimes,
    })
}
