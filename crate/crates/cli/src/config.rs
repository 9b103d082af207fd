//! TOML run configuration. Every engine constant is a top-level key whose
//! default is the reference experiment's value; synthetic-market settings
//! live under `[synth]`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::Deserialize;
use statarb::backtest::{BacktestParams, StrategySpec};
use statarb::construct::OptimizerConfig;
use statarb::riskmodel::RiskModelConfig;
use statarb::synth::SynthConfig;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    /// `"table1"` for the full 36-cell grid.
    Named(String),
    /// Explicit cells such as `"C2C1_SIC_REG_N"`.
    Cells(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bar CSV or manifest. Absent means an in-memory synthetic market.
    pub bars: Option<PathBuf>,
    /// `ticker,code` CSV of fundamental industry codes.
    pub classification: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub universe_size: usize,
    pub lookback: usize,
    pub refresh_period: usize,
    pub backtest_days: usize,
    pub gross: f64,
    /// Position bound as a fraction of ADDV.
    pub bound_fraction: f64,
    pub cost_linear_bps: f64,
    /// Average cost per traded dollar the impact term is calibrated to.
    pub cost_bps: f64,
    pub stat_levels: Vec<usize>,
    pub floor_fraction: f64,
    pub max_iterations: Option<usize>,
    /// Drawdown window; set `drawdown = false` to skip it.
    pub drawdown: bool,
    pub drawdown_start: NaiveDate,
    pub drawdown_end: NaiveDate,
    pub grid: GridSpec,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = BacktestParams::default();
        let (drawdown_start, drawdown_end) = statarb::backtest::reference_drawdown_window();
        RunConfig {
            bars: None,
            classification: None,
            out: PathBuf::from("out"),
            seed: p.seed,
            universe_size: p.universe_size,
            lookback: p.lookback,
            refresh_period: p.refresh_period,
            backtest_days: p.backtest_days,
            gross: p.gross,
            bound_fraction: p.bound_fraction,
            cost_linear_bps: p.cost_linear * 1e4,
            cost_bps: p.cost_target * 1e4,
            stat_levels: p.stat_levels,
            floor_fraction: p.risk.floor_fraction,
            max_iterations: p.optimizer.max_iterations,
            drawdown: true,
            drawdown_start,
            drawdown_end,
            grid: GridSpec::Named("table1".into()),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path`; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.bars, &mut cfg.classification]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn grid(&self) -> Result<Vec<StrategySpec>> {
        let grid = match &self.grid {
            GridSpec::Named(name) if name.eq_ignore_ascii_case("table1") => {
                StrategySpec::table1_grid()
            }
            GridSpec::Named(name) => {
                vec![StrategySpec::from_slug(name).map_err(anyhow::Error::msg)?]
            }
            GridSpec::Cells(cells) => cells
                .iter()
                .map(|c| StrategySpec::from_slug(c).map_err(anyhow::Error::msg))
                .collect::<Result<_>>()?,
        };
        if grid.is_empty() {
            bail!("strategy grid is empty");
        }
        for (i, s) in grid.iter().enumerate() {
            if grid[..i].contains(s) {
                bail!("strategy {} listed twice", s.slug());
            }
        }
        Ok(grid)
    }

    pub fn params(&self) -> BacktestParams {
        BacktestParams {
            universe_size: self.universe_size,
            lookback: self.lookback,
            refresh_period: self.refresh_period,
            backtest_days: self.backtest_days,
            gross: self.gross,
            bound_fraction: self.bound_fraction,
            cost_linear: self.cost_linear_bps * 1e-4,
            cost_target: self.cost_bps * 1e-4,
            stat_levels: self.stat_levels.clone(),
            seed: self.seed,
            risk: RiskModelConfig {
                floor_fraction: self.floor_fraction,
            },
            optimizer: OptimizerConfig {
                max_iterations: self.max_iterations,
            },
            drawdown_window: self
                .drawdown
                .then_some((self.drawdown_start, self.drawdown_end)),
        }
    }

    /// Fails on input paths that do not exist.
    pub fn check_paths(&self) -> Result<()> {
        for p in [&self.bars, &self.classification].into_iter().flatten() {
            if !p.exists() {
                bail!("input path {} does not exist", p.display());
            }
        }
        Ok(())
    }

    /// Applies `--seed` to both the engine and the synthetic market.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.synth.seed = seed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_constants() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        let p = cfg.params();
        assert_eq!(p, BacktestParams::default());
        assert_eq!(cfg.grid().unwrap().len(), 36);
    }

    #[test]
    fn flat_keys_override() {
        let cfg: RunConfig = toml::from_str(
            "universe_size = 100\ncost_bps = 20\nstat_levels = [8, 4]\ngrid = [\"D0_STAT_OPT_Y\"]\ndrawdown = false\n[synth]\ntickers = 50\n",
        )
        .unwrap();
        let p = cfg.params();
        assert_eq!(p.universe_size, 100);
        assert!((p.cost_target - 2e-3).abs() < 1e-15);
        assert_eq!(p.stat_levels, vec![8, 4]);
        assert_eq!(p.drawdown_window, None);
        assert_eq!(cfg.grid().unwrap()[0].slug(), "D0_STAT_OPT_Y");
        assert_eq!(cfg.synth.tickers, 50);
    }

    #[test]
    fn unknown_keys_and_duplicate_cells_rejected() {
        assert!(toml::from_str::<RunConfig>("universe = 5").is_err());
        let cfg: RunConfig = toml::from_str("grid = [\"D0_SIC_REG_N\", \"D0_SIC_REG_N\"]").unwrap();
        assert!(cfg.grid().is_err());
    }
}
