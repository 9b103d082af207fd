//! Daily-bar statistical arbitrage backtesting: universe selection, industry
//! classifications, return signals, factor risk models, bounded portfolio
//! construction, transaction costs and the backtest engine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod classify;
pub mod construct;
pub mod costs;
pub mod data;
pub mod riskmodel;
pub mod signals;
pub mod stats;
pub mod synth;
