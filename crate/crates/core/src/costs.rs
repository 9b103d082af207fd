//! Liquidity- and volatility-dependent trading costs with a 3/5 impact exponent.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Universe;

pub const IMPACT_EXPONENT: f64 = 0.6;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("ADDV must be positive, got {0}")]
    NonPositiveAddv(f64),
    #[error("trade size must be non-negative, got {0}")]
    NegativeTrade(f64),
    #[error("invalid calibration input: {0}")]
    Invalid(String),
}

/// `cost = T · (a + b · σ · (T / ADDV)^(3/5))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub linear: f64,
    pub impact: f64,
    pub calibration: Option<Calibration>,
}

/// Inputs the impact coefficient was solved against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub target_rate: f64,
    pub reference_gross: f64,
    pub members: usize,
    /// Mean of `T / ADDV` over members at the reference trade size.
    pub mean_participation: f64,
    /// Mean daily volatility over members.
    pub mean_sigma: f64,
}

impl CostModel {
    pub fn new(linear: f64, impact: f64) -> Result<Self, CostError> {
        if !(linear >= 0.0 && impact >= 0.0) {
            return Err(CostError::Invalid(
                "cost coefficients must be non-negative".into(),
            ));
        }
        Ok(CostModel {
            linear,
            impact,
            calibration: None,
        })
    }

    pub fn trade_cost(&self, trade: f64, addv: f64, sigma: f64) -> Result<f64, CostError> {
        trade_cost(trade, addv, sigma, self)
    }
}

pub fn trade_cost(trade: f64, addv: f64, sigma: f64, model: &CostModel) -> Result<f64, CostError> {
    if !(addv > 0.0) {
        return Err(CostError::NonPositiveAddv(addv));
    }
    if !(trade >= 0.0) {
        return Err(CostError::NegativeTrade(trade));
    }
    if trade == 0.0 {
        return Ok(0.0);
    }
    Ok(trade * (model.linear + model.impact * sigma * (trade / addv).powf(IMPACT_EXPONENT)))
}

/// Solves the impact coefficient so that trading an equal-weighted portfolio
/// of gross `gross` once costs `target_rate` of the traded dollars on average.
///
/// The average rate is `a + b · mean_i σ_i (T/ADDV_i)^(3/5)` with `T = gross/n`,
/// linear in `b`, so the root is taken in closed form.
pub fn calibrate(
    universe: &Universe,
    gross: f64,
    linear: f64,
    target_rate: f64,
) -> Result<CostModel, CostError> {
    let sigmas: Vec<f64> = universe.sigma2.iter().map(|v| v.max(0.0).sqrt()).collect();
    calibrate_from(&sigmas, &universe.addv, gross, linear, target_rate)
}

/// [`calibrate`] from explicit volatilities and ADDVs.
pub fn calibrate_from(
    sigmas: &[f64],
    addv: &[f64],
    gross: f64,
    linear: f64,
    target_rate: f64,
) -> Result<CostModel, CostError> {
    let n = sigmas.len();
    if n == 0 || addv.len() != n {
        return Err(CostError::Invalid(
            "need matching nonempty σ and ADDV".into(),
        ));
    }
    if !(gross > 0.0) || !(linear >= 0.0) || !(target_rate >= 0.0) {
        return Err(CostError::Invalid(
            "gross must be positive and rates non-negative".into(),
        ));
    }
    if let Some(a) = addv.iter().find(|a| !(**a > 0.0)) {
        return Err(CostError::NonPositiveAddv(*a));
    }
    let trade = gross / n as f64;
    let unit: f64 = sigmas
        .iter()
        .zip(addv)
        .map(|(s, a)| s * (trade / a).powf(IMPACT_EXPONENT))
        .sum::<f64>()
        / n as f64;
    let impact = if unit > 0.0 && target_rate > linear {
        (target_rate - linear) / unit
    } else {
        warn!("cost calibration unattainable (impact scale {unit:e}); using linear cost only");
        0.0
    };
    Ok(CostModel {
        linear,
        impact,
        calibration: Some(Calibration {
            target_rate,
            reference_gross: gross,
            members: n,
            mean_participation: addv.iter().map(|a| trade / a).sum::<f64>() / n as f64,
            mean_sigma: sigmas.iter().sum::<f64>() / n as f64,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn average_rate(model: &CostModel, sigmas: &[f64], addv: &[f64], gross: f64) -> f64 {
        let t = gross / sigmas.len() as f64;
        let total: f64 = sigmas
            .iter()
            .zip(addv)
            .map(|(s, a)| trade_cost(t, *a, *s, model).unwrap())
            .sum();
        total / gross
    }

    #[test]
    fn hand_values() {
        let m = CostModel::new(1e-3, 0.0).unwrap();
        assert_eq!(trade_cost(0.0, 1e6, 0.02, &m).unwrap(), 0.0);
        assert!((trade_cost(1e6, 1e7, 0.02, &m).unwrap() - 1000.0).abs() < 1e-9);
        assert!(trade_cost(1.0, 0.0, 0.02, &m).is_err());
    }

    #[test]
    fn identical_members_closed_form() {
        let (s, a, gross, n) = (0.02, 5e7, 2e7, 100);
        let m = calibrate_from(&vec![s; n], &vec![a; n], gross, 5e-4, 1e-3).unwrap();
        let t: f64 = gross / n as f64;
        let b = 5e-4 / (s * (t / a).powf(0.6));
        assert!((m.impact - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn zero_sigma_gives_linear_only() {
        let m = calibrate_from(&[0.0; 3], &[1e6; 3], 2e7, 5e-4, 1e-3).unwrap();
        assert_eq!(m.impact, 0.0);
        assert!((average_rate(&m, &[0.0; 3], &[1e6; 3], 2e7) - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn heterogeneous_calibration_hits_target() {
        let sigmas: Vec<f64> = (0..2000)
            .map(|i| 0.01 + 0.03 * ((i * 37 % 101) as f64 / 100.0))
            .collect();
        let addv: Vec<f64> = (0..2000)
            .map(|i| 1e6 * (1.0 + (i * 53 % 997) as f64))
            .collect();
        let m = calibrate_from(&sigmas, &addv, 2e7, 5e-4, 1e-3).unwrap();
        let rate = average_rate(&m, &sigmas, &addv, 2e7);
        assert!((rate - 1e-3).abs() < 1e-7, "{rate}");
    }

    #[test]
    fn monotone_and_superlinear() {
        let m = CostModel::new(5e-4, 0.5).unwrap();
        let c = |t: f64, a: f64, s: f64| trade_cost(t, a, s, &m).unwrap();
        assert!(c(2e5, 1e7, 0.02) > c(1e5, 1e7, 0.02));
        assert!(c(1e5, 1e7, 0.03) > c(1e5, 1e7, 0.02));
        assert!(c(1e5, 5e6, 0.02) > c(1e5, 1e7, 0.02));
        assert!(c(2e5, 1e7, 0.02) > 2.0 * c(1e5, 1e7, 0.02));
    }
}
