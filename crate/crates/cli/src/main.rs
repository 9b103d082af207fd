//! `statarb`: generate synthetic bars, run the strategy grid, re-render reports.

mod config;
mod plot;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use statarb::backtest::report::{read_daily_csv, write_daily_csv, write_summary_csv};
use statarb::backtest::{
    run_grid, ClassificationChoice, Constructor, DailySeries, Metrics, StrategySpec,
};
use statarb::classify::{load_fundamental_classification, Classification};
use statarb::data::{load_bars, BarFormat, BarPanel};
use statarb::signals::SignalKind;
use statarb::synth::generate_market;

use config::RunConfig;
use plot::Panel;

const CELLS_DIR: &str = "cells";
const DAILY_FILE: &str = "daily_pnl.csv";
const SUMMARY_FILE: &str = "summary.csv";
const CELL_PLOT: &str = "cumulative_pnl.svg";

#[derive(Parser)]
#[command(
    name = "statarb",
    version,
    about = "Daily-bar statistical arbitrage backtests"
)]
struct Cli {
    /// TOML run configuration; omitted keys take reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the synthetic market and statistical clustering.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic market as `bars.csv` and `labels.csv`.
    Synth,
    /// Run the strategy grid and write per-cell and combined artifacts.
    Backtest,
    /// Rebuild summaries and plots from stored daily P&L files.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot configure worker threads")?;
    }
    match cli.command {
        Command::Synth => staged(&cfg.out, |dir| cmd_synth(&cfg, dir)),
        Command::Backtest => {
            let grid = cfg.grid()?;
            cfg.check_paths()?;
            staged(&cfg.out, |dir| cmd_backtest(&cfg, &grid, dir))
        }
        Command::Report => cmd_report(&cfg),
    }
}

/// Runs `work` against a fresh staging directory inside `out` and moves its
/// entries into `out` only on success. Failure leaves `out` untouched.
fn staged(out: &Path, work: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let stage = out.join(format!(".staging-{}", std::process::id()));
    if stage.exists() {
        fs::remove_dir_all(&stage)?;
    }
    fs::create_dir(&stage).with_context(|| format!("cannot create {}", stage.display()))?;
    let result = work(&stage).and_then(|()| publish(&stage, out));
    if stage.exists() {
        let _ = fs::remove_dir_all(&stage);
    }
    result
}

fn publish(stage: &Path, out: &Path) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(stage)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for src in entries {
        let dst = out.join(src.file_name().expect("directory entry has a name"));
        if dst.is_dir() {
            fs::remove_dir_all(&dst)?;
        } else if dst.exists() {
            fs::remove_file(&dst)?;
        }
        fs::rename(&src, &dst)
            .with_context(|| format!("cannot move output to {}", dst.display()))?;
    }
    Ok(())
}

fn cmd_synth(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let market = generate_market(&cfg.synth)?;
    market.panel.write_csv(&dir.join("bars.csv"))?;
    market.labels.write_csv(&dir.join("labels.csv"))?;
    info!(
        "wrote {} tickers x {} days to {}",
        market.panel.n_tickers(),
        market.panel.n_dates(),
        cfg.out.display()
    );
    Ok(())
}

fn load_inputs(cfg: &RunConfig) -> Result<(BarPanel, Option<Classification>)> {
    match &cfg.bars {
        Some(bars) => {
            let panel = load_bars(bars, BarFormat::detect(bars))?;
            let class = cfg
                .classification
                .as_deref()
                .map(load_fundamental_classification)
                .transpose()?;
            Ok((panel, class))
        }
        None => {
            info!("no `bars` configured; generating a synthetic market");
            let market = generate_market(&cfg.synth)?;
            let class = match &cfg.classification {
                Some(p) => load_fundamental_classification(p)?,
                None => market.labels,
            };
            Ok((market.panel, Some(class)))
        }
    }
}

fn cmd_backtest(cfg: &RunConfig, grid: &[StrategySpec], dir: &Path) -> Result<()> {
    let (panel, class) = load_inputs(cfg)?;
    info!(
        "running {} strategies on {} tickers x {} days",
        grid.len(),
        panel.n_tickers(),
        panel.n_dates()
    );
    let params = cfg.params();
    let results = run_grid(&panel, grid, &params, class.as_ref())?;
    let cells: Vec<Cell> = results
        .into_iter()
        .map(|r| Cell {
            spec: r.spec,
            series: r.series,
            metrics: r.metrics,
        })
        .collect();
    write_reports(dir, &cells)
}

struct Cell {
    spec: StrategySpec,
    series: DailySeries,
    metrics: Metrics,
}

/// Per-cell daily series, summaries and plots, the combined summary, and one 2×3 panel
/// plot per complete (classification, constructor, costs) triple.
fn write_reports(dir: &Path, cells: &[Cell]) -> Result<()> {
    for cell in cells {
        let cdir = dir.join(CELLS_DIR).join(cell.spec.slug());
        fs::create_dir_all(&cdir)?;
        write_daily_csv(&cdir.join(DAILY_FILE), &cell.series)?;
        write_summary_csv(&cdir.join(SUMMARY_FILE), [(&cell.spec, &cell.metrics)])?;
        let svg = plot::render_single(&panel_for(cell, &cell.spec.to_string()));
        fs::write(cdir.join(CELL_PLOT), svg)?;
    }
    write_summary_csv(
        &dir.join(SUMMARY_FILE),
        cells.iter().map(|c| (&c.spec, &c.metrics)),
    )?;

    let mut triples: BTreeMap<(ClassificationChoice, Constructor, bool), Vec<&Cell>> =
        BTreeMap::new();
    for cell in cells {
        let s = cell.spec;
        triples
            .entry((s.classification, s.constructor, s.costs))
            .or_default()
            .push(cell);
    }
    for ((class, ctor, costs), members) in triples {
        let panels: Vec<Option<Panel>> = SignalKind::GRID
            .iter()
            .map(|k| {
                members
                    .iter()
                    .find(|c| c.spec.kind == *k)
                    .map(|c| panel_for(c, &k.to_string()))
            })
            .collect();
        if panels.iter().any(Option::is_none) {
            continue;
        }
        let costs = if costs { "Y" } else { "N" };
        let title = format!("{class} {ctor}, costs {costs}: cumulative P&L ($)");
        let svg = plot::render_grid(&title, &panels, 2, 3);
        fs::write(dir.join(format!("panels_{class}_{ctor}_{costs}.svg")), svg)?;
    }
    Ok(())
}

fn panel_for<'a>(cell: &'a Cell, title: &str) -> Panel<'a> {
    Panel {
        title: title.to_string(),
        dates: &cell.series.dates,
        pnl: &cell.series.pnl,
    }
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let root = cfg.out.join(CELLS_DIR);
    let entries = fs::read_dir(&root).with_context(|| format!("cannot read {}", root.display()))?;
    let mut specs = Vec::new();
    for entry in entries {
        let entry = entry?;
        if !entry.path().join(DAILY_FILE).is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let spec = StrategySpec::from_slug(&name)
            .map_err(anyhow::Error::msg)
            .with_context(|| format!("unrecognized cell directory {}", entry.path().display()))?;
        specs.push(spec);
    }
    if specs.is_empty() {
        bail!("no {DAILY_FILE} files under {}", root.display());
    }
    let table = StrategySpec::table1_grid();
    specs.sort_by_key(|s| {
        (
            table.iter().position(|t| t == s).unwrap_or(usize::MAX),
            s.slug(),
        )
    });

    let params = cfg.params();
    let mut cells = Vec::with_capacity(specs.len());
    for spec in specs {
        let path = root.join(spec.slug()).join(DAILY_FILE);
        let series = read_daily_csv(&path)?;
        let metrics = Metrics::compute(
            &series.dates,
            &series.pnl,
            &series.traded_shares,
            params.gross,
            params.drawdown_window,
        )
        .with_context(|| format!("cannot summarize {}", path.display()))?;
        cells.push(Cell {
            spec,
            series,
            metrics,
        });
    }
    staged(&cfg.out, |dir| write_reports(dir, &cells))?;
    info!("re-rendered {} cells in {}", cells.len(), cfg.out.display());
    Ok(())
}
