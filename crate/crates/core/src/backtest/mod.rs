//! The intraday backtest: establish at the open, liquidate at the close,
//! never reinvest.
//!
//! Universe, variances, classifications, risk models and the cost model are
//! frozen at each refresh date and reused until the next one. Every day's
//! P&L depends only on its own refresh state and its own bars, so days and
//! strategy cells are evaluated in parallel and reduced in calendar order.

pub mod metrics;
pub mod report;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    build_statistical_classification, Classification, ClassifyError, DummyMatrix,
};
use crate::construct::{
    optimize_portfolio, regression_portfolio, weighted_regression_residuals, ConstructError,
    Holdings, OptimizerConfig,
};
use crate::costs::{calibrate_from, trade_cost, CostError, CostModel};
use crate::data::{backtest_start, select_universe_at, BarPanel, DataError, Universe};
use crate::riskmodel::{build_risk_model, RiskModel, RiskModelConfig, RiskModelError};
use crate::signals::{compute_signal, historical_variance, SignalKind};

pub use metrics::{Drawdown, MetricError, Metrics};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    RiskModel(#[from] RiskModelError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("strategy needs a fundamental classification but none was supplied")]
    MissingClassification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassificationChoice {
    /// Supplied industry codes (SIC in the reference experiment).
    Fundamental,
    /// Multi-level k-means clusters rebuilt at every refresh.
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constructor {
    Reg,
    Opt,
}

/// One row of the strategy grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategySpec {
    pub kind: SignalKind,
    pub classification: ClassificationChoice,
    pub constructor: Constructor,
    pub costs: bool,
}

impl fmt::Display for ClassificationChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassificationChoice::Fundamental => "SIC",
            ClassificationChoice::Statistical => "STAT",
        })
    }
}

impl FromStr for ClassificationChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SIC" | "FUNDAMENTAL" => Ok(ClassificationChoice::Fundamental),
            "STAT" | "STATISTICAL" => Ok(ClassificationChoice::Statistical),
            _ => Err(format!("unknown classification `{s}`")),
        }
    }
}

impl fmt::Display for Constructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constructor::Reg => "REG",
            Constructor::Opt => "OPT",
        })
    }
}

impl FromStr for Constructor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "REG" => Ok(Constructor::Reg),
            "OPT" => Ok(Constructor::Opt),
            _ => Err(format!("unknown constructor `{s}`")),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.kind,
            self.classification,
            self.constructor,
            if self.costs { "Y" } else { "N" }
        )
    }
}

impl StrategySpec {
    pub fn new(
        kind: SignalKind,
        classification: ClassificationChoice,
        constructor: Constructor,
        costs: bool,
    ) -> Self {
        StrategySpec {
            kind,
            classification,
            constructor,
            costs,
        }
    }

    /// Directory-safe name, e.g. `C2C1_SIC_REG_N`.
    pub fn slug(&self) -> String {
        self.to_string().replace(' ', "_")
    }

    pub fn from_slug(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(['_', ' ']).collect();
        if parts.len() != 4 {
            return Err(format!("malformed strategy `{s}`"));
        }
        let costs = match parts[3].to_ascii_uppercase().as_str() {
            "Y" => true,
            "N" => false,
            other => return Err(format!("costs flag must be Y or N, got `{other}`")),
        };
        Ok(StrategySpec {
            kind: parts[0].parse()?,
            classification: parts[1].parse()?,
            constructor: parts[2].parse()?,
            costs,
        })
    }

    /// The 36 rows of the reference results table, in its order.
    pub fn table1_grid() -> Vec<StrategySpec> {
        use ClassificationChoice::*;
        use Constructor::*;
        let kinds = [
            SignalKind::D0,
            SignalKind::Mom1,
            SignalKind::C2C(1),
            SignalKind::C2C(5),
            SignalKind::C2C(10),
            SignalKind::C2C(20),
        ];
        let mut grid = Vec::with_capacity(36);
        for (class, ctor) in [(Fundamental, Reg), (Fundamental, Opt), (Statistical, Opt)] {
            for kind in kinds {
                for costs in [false, true] {
                    grid.push(StrategySpec::new(kind, class, ctor, costs));
                }
            }
        }
        grid
    }

    fn holdings_key(&self) -> (SignalKind, ClassificationChoice, Constructor) {
        (self.kind, self.classification, self.constructor)
    }
}

/// Engine parameters; defaults are the reference experiment's constants.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestParams {
    pub universe_size: usize,
    /// Days of history behind ADDV, variances, clustering and risk models.
    pub lookback: usize,
    /// Trading days between refreshes.
    pub refresh_period: usize,
    /// Length of the backtest window; P&L covers all but its first day.
    pub backtest_days: usize,
    pub gross: f64,
    /// Position bound as a fraction of ADDV.
    pub bound_fraction: f64,
    pub cost_linear: f64,
    /// Average cost rate the impact term is calibrated to.
    pub cost_target: f64,
    /// Cluster counts per statistical level, finest first.
    pub stat_levels: Vec<usize>,
    pub seed: u64,
    pub risk: RiskModelConfig,
    pub optimizer: OptimizerConfig,
    pub drawdown_window: Option<(NaiveDate, NaiveDate)>,
}

impl Default for BacktestParams {
    fn default() -> Self {
        BacktestParams {
            universe_size: 2000,
            lookback: 21,
            refresh_period: 21,
            backtest_days: 252,
            gross: 2e7,
            bound_fraction: 0.01,
            cost_linear: 5e-4,
            cost_target: 1e-3,
            stat_levels: vec![100, 30, 10],
            seed: 0,
            risk: RiskModelConfig::default(),
            optimizer: OptimizerConfig::default(),
            drawdown_window: Some(reference_drawdown_window()),
        }
    }
}

/// February 20 to March 23, 2020.
pub fn reference_drawdown_window() -> (NaiveDate, NaiveDate) {
    (
        NaiveDate::from_ymd_opt(2020, 2, 20).expect("valid date"),
        NaiveDate::from_ymd_opt(2020, 3, 23).expect("valid date"),
    )
}

impl BacktestParams {
    pub fn validate(&self) -> Result<(), BacktestError> {
        let bad = |m: &str| Err(BacktestError::Params(m.into()));
        if self.universe_size < 2 {
            return bad("universe size must be at least 2");
        }
        if self.lookback < 2 {
            return bad("lookback must be at least 2");
        }
        if self.refresh_period == 0 {
            return bad("refresh period must be positive");
        }
        if self.backtest_days < 2 {
            return bad("backtest needs at least 2 days");
        }
        if !(self.gross > 0.0 && self.gross.is_finite()) {
            return bad("gross must be positive");
        }
        if !(self.bound_fraction > 0.0) {
            return bad("bound fraction must be positive");
        }
        if !(self.cost_linear >= 0.0 && self.cost_target >= 0.0) {
            return bad("cost rates must be non-negative");
        }
        if self.stat_levels.is_empty() || self.stat_levels.contains(&0) {
            return bad("statistical levels must be a nonempty list of positive counts");
        }
        if let Some((a, b)) = self.drawdown_window {
            if a > b {
                return bad("drawdown window ends before it starts");
            }
        }
        Ok(())
    }
}

/// Per-day series of one backtest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DailySeries {
    pub dates: Vec<NaiveDate>,
    pub pnl: Vec<f64>,
    pub traded_dollars: Vec<f64>,
    pub traded_shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Days with no position at all.
    pub flat_days: usize,
    /// Days on which the optimizer hit its iteration cap.
    pub nonconverged_days: usize,
    pub max_kkt_residual: f64,
    pub total_costs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub spec: StrategySpec,
    pub series: DailySeries,
    pub metrics: Metrics,
    pub diagnostics: Diagnostics,
}

/// One classification as seen by a refresh: the universe rows it covers and
/// their dummy matrix at the finest level.
struct ClassView {
    rows: Vec<usize>,
    dummy: DummyMatrix,
    risk: Option<RiskModel>,
}

struct Refresh {
    universe: Universe,
    variances: Vec<f64>,
    sigmas: Vec<f64>,
    bounds: Vec<f64>,
    costs: CostModel,
    views: HashMap<ClassificationChoice, ClassView>,
}

#[derive(Debug, Clone, Copy, Default)]
struct DayOutcome {
    pnl: f64,
    cost: f64,
    traded_dollars: f64,
    traded_shares: f64,
    flat: bool,
    converged: bool,
    kkt: f64,
}

/// Runs one strategy cell.
pub fn run_backtest(
    panel: &BarPanel,
    spec: StrategySpec,
    params: &BacktestParams,
    fundamental: Option<&Classification>,
) -> Result<BacktestResult, BacktestError> {
    Ok(run_grid(panel, &[spec], params, fundamental)?.remove(0))
}

/// Runs every cell of `specs`, sharing refresh state across cells and
/// holdings across cells that differ only in costs. Results follow `specs`.
pub fn run_grid(
    panel: &BarPanel,
    specs: &[StrategySpec],
    params: &BacktestParams,
    fundamental: Option<&Classification>,
) -> Result<Vec<BacktestResult>, BacktestError> {
    params.validate()?;
    if specs.is_empty() {
        return Err(BacktestError::Params("strategy grid is empty".into()));
    }
    if fundamental.is_none()
        && specs
            .iter()
            .any(|s| s.classification == ClassificationChoice::Fundamental)
    {
        return Err(BacktestError::MissingClassification);
    }
    let start = backtest_start(panel.n_dates(), params.backtest_days)?;
    if start < params.lookback + 1 {
        return Err(DataError::ShortCalendar {
            required: params.backtest_days + params.lookback + 1,
            available: panel.n_dates(),
        }
        .into());
    }

    let mut needs: HashMap<ClassificationChoice, bool> = HashMap::new();
    for s in specs {
        *needs.entry(s.classification).or_insert(false) |= s.constructor == Constructor::Opt;
    }
    let refresh_days: Vec<usize> = (0..params.backtest_days)
        .step_by(params.refresh_period)
        .collect();
    let refreshes: Vec<Refresh> = refresh_days
        .par_iter()
        .enumerate()
        .map(|(r, &w)| build_refresh(panel, start + w, r, params, fundamental, &needs))
        .collect::<Result<_, _>>()?;

    let mut keys: Vec<(SignalKind, ClassificationChoice, Constructor)> = Vec::new();
    for s in specs {
        if !keys.contains(&s.holdings_key()) {
            keys.push(s.holdings_key());
        }
    }
    let days: Vec<usize> = (1..params.backtest_days).collect();
    let tasks: Vec<(usize, usize)> = (0..keys.len())
        .flat_map(|k| days.iter().map(move |&w| (k, w)))
        .collect();
    let outcomes: Vec<DayOutcome> = tasks
        .par_iter()
        .map(|&(k, w)| {
            let (kind, class, ctor) = keys[k];
            let refresh = &refreshes[w / params.refresh_period];
            run_day(panel, start + w, refresh, kind, class, ctor, params)
        })
        .collect::<Result<_, _>>()?;

    let dates: Vec<NaiveDate> = days.iter().map(|&w| panel.calendar()[start + w]).collect();
    specs
        .iter()
        .map(|spec| {
            let k = keys
                .iter()
                .position(|key| *key == spec.holdings_key())
                .expect("key registered");
            let day_out = &outcomes[k * days.len()..(k + 1) * days.len()];
            assemble(*spec, &dates, day_out, params)
        })
        .collect()
}

fn assemble(
    spec: StrategySpec,
    dates: &[NaiveDate],
    outcomes: &[DayOutcome],
    params: &BacktestParams,
) -> Result<BacktestResult, BacktestError> {
    let mut series = DailySeries {
        dates: dates.to_vec(),
        ..Default::default()
    };
    let mut diagnostics = Diagnostics::default();
    for o in outcomes {
        let cost = if spec.costs { o.cost } else { 0.0 };
        series.pnl.push(o.pnl - cost);
        series.traded_dollars.push(o.traded_dollars);
        series.traded_shares.push(o.traded_shares);
        diagnostics.flat_days += o.flat as usize;
        diagnostics.nonconverged_days += (!o.converged) as usize;
        diagnostics.max_kkt_residual = diagnostics.max_kkt_residual.max(o.kkt);
        diagnostics.total_costs += cost;
    }
    if diagnostics.nonconverged_days > 0 {
        warn!(
            "{spec}: optimizer hit its iteration cap on {} days",
            diagnostics.nonconverged_days
        );
    }
    let metrics = Metrics::compute(
        &series.dates,
        &series.pnl,
        &series.traded_shares,
        params.gross,
        params.drawdown_window,
    )?;
    Ok(BacktestResult {
        spec,
        series,
        metrics,
        diagnostics,
    })
}

fn build_refresh(
    panel: &BarPanel,
    t: usize,
    index: usize,
    params: &BacktestParams,
    fundamental: Option<&Classification>,
    needs: &HashMap<ClassificationChoice, bool>,
) -> Result<Refresh, BacktestError> {
    let universe = select_universe_at(panel, t, params.universe_size, params.lookback)?;
    let variances: Vec<f64> = historical_variance(panel, &universe.indices, t, params.lookback)
        .into_iter()
        .map(|v| v.expect("universe members carry full lookback history"))
        .collect();
    let sigmas: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let bounds = universe.bounds(params.bound_fraction);
    let costs = calibrate_from(
        &sigmas,
        &universe.addv,
        params.gross,
        params.cost_linear,
        params.cost_target,
    )?;
    let returns: Vec<Vec<f64>> = universe
        .indices
        .iter()
        .map(|&i| {
            panel
                .trailing_returns(t, i, params.lookback)
                .expect("eligible member")
        })
        .collect();

    let mut views = HashMap::new();
    for (&class, &with_risk) in needs {
        let (rows, labels): (Vec<usize>, Vec<u32>) = match class {
            ClassificationChoice::Fundamental => {
                let c = fundamental.ok_or(BacktestError::MissingClassification)?;
                let covered: Vec<(usize, u32)> = universe
                    .members
                    .iter()
                    .enumerate()
                    .filter_map(|(j, m)| c.cluster_of(0, m).map(|code| (j, code)))
                    .collect();
                if covered.len() < universe.len() {
                    warn!(
                        "{}: {} universe members lack an industry code and are not traded",
                        panel.calendar()[t],
                        universe.len() - covered.len()
                    );
                }
                covered.into_iter().unzip()
            }
            ClassificationChoice::Statistical => {
                let n = universe.len();
                let levels: Vec<usize> = params.stat_levels.iter().map(|&k| k.min(n)).collect();
                let seed = params.seed.wrapping_add(1000 * index as u64);
                let stat =
                    build_statistical_classification(&universe.members, &returns, &levels, seed)?;
                ((0..n).collect(), stat.level(0).to_vec())
            }
        };
        let members: Vec<String> = rows.iter().map(|&j| universe.members[j].clone()).collect();
        let dummy = DummyMatrix::from_labels(members, &labels);
        let risk = if with_risk && rows.len() >= 2 {
            let r: Vec<Vec<f64>> = rows.iter().map(|&j| returns[j].clone()).collect();
            Some(build_risk_model(&r, &dummy, params.risk)?)
        } else {
            None
        };
        views.insert(class, ClassView { rows, dummy, risk });
    }
    debug!(
        "refresh {} at {}: {} members",
        index,
        panel.calendar()[t],
        universe.len()
    );
    Ok(Refresh {
        universe,
        variances,
        sigmas,
        bounds,
        costs,
        views,
    })
}

/// Builds the day's holdings for one cell and settles them at the close.
fn run_day(
    panel: &BarPanel,
    t: usize,
    refresh: &Refresh,
    kind: SignalKind,
    class: ClassificationChoice,
    ctor: Constructor,
    params: &BacktestParams,
) -> Result<DayOutcome, BacktestError> {
    let view = &refresh.views[&class];
    let columns: Vec<usize> = view
        .rows
        .iter()
        .map(|&j| refresh.universe.indices[j])
        .collect();
    let signal = compute_signal(panel, &columns, t, kind);
    // Positions within `view.rows` that can trade today.
    let keep: Vec<usize> = (0..view.rows.len())
        .filter(|&p| signal.values[p].is_some() && panel.is_present(t, columns[p]))
        .collect();
    let mut outcome = DayOutcome {
        flat: true,
        converged: true,
        ..Default::default()
    };
    if keep.len() < 2 {
        warn!(
            "{}: {} tradable members, holding nothing",
            panel.calendar()[t],
            keep.len()
        );
        return Ok(outcome);
    }
    let rows: Vec<usize> = keep.iter().map(|&p| view.rows[p]).collect();
    let values: Vec<f64> = keep
        .iter()
        .map(|&p| signal.values[p].expect("kept"))
        .collect();
    let variances: Vec<f64> = rows.iter().map(|&j| refresh.variances[j]).collect();
    let bounds: Vec<f64> = rows.iter().map(|&j| refresh.bounds[j]).collect();
    let dummy = view.dummy.restrict(&keep);
    let holdings: Holdings = match ctor {
        Constructor::Reg => regression_portfolio(
            &values,
            &dummy,
            &variances,
            &bounds,
            kind.direction(),
            params.gross,
        )?,
        Constructor::Opt => {
            let weights: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
            let eps = weighted_regression_residuals(&values, &dummy, &weights)?;
            let s = kind.direction().sign();
            let expected: Vec<f64> = eps.iter().map(|e| s * e).collect();
            let model = view
                .risk
                .as_ref()
                .expect("risk model built for OPT")
                .restrict(&keep);
            optimize_portfolio(&expected, &model, &bounds, params.gross, params.optimizer)?
        }
    };
    outcome.converged = holdings.info.converged;
    outcome.kkt = holdings.info.kkt_residual;
    outcome.flat = holdings.is_flat();
    for ((&j, &p), &d) in rows.iter().zip(&keep).zip(&holdings.dollars) {
        if d == 0.0 {
            continue;
        }
        let col = columns[p];
        let (open, close) = (
            panel.open(t, col).expect("present"),
            panel.close(t, col).expect("present"),
        );
        let size = d.abs();
        outcome.pnl += d * (close - open) / open;
        outcome.traded_dollars += 2.0 * size;
        outcome.traded_shares += size / open + size / close;
        outcome.cost += 2.0
            * trade_cost(
                size,
                refresh.universe.addv[j],
                refresh.sigmas[j],
                &refresh.costs,
            )?;
    }
    Ok(outcome)
}
