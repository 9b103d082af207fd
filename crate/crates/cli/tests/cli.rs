use std::path::Path;
use std::process::{Command, Output};

use statarb::data::{load_bars, BarFormat};
use statarb::synth::{generate_market, SynthConfig};

fn statarb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statarb"))
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL: &str = "universe_size = 50
backtest_days = 60
stat_levels = [6, 3]
[synth]
tickers = 60
industries = 6
normal_days = 90
selloff_days = 10
";

#[test]
fn missing_config_is_named_in_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = statarb(dir.path(), &["--config", "no_such_run.toml", "backtest"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_run.toml"));
}

#[test]
fn synth_row_count_matches_tickers_times_days() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[synth]\ntickers = 200\nnormal_days = 377\nselloff_days = 23\n",
    )
    .unwrap();
    ok(statarb(
        dir.path(),
        &["--config", "c.toml", "--out", "m", "synth"],
    ));
    let text = std::fs::read_to_string(dir.path().join("m/bars.csv")).unwrap();
    assert_eq!(text.lines().count(), 80_000 + 1);
    let labels = std::fs::read_to_string(dir.path().join("m/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 200 + 1);
}

#[test]
fn default_synth_round_trips_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    ok(statarb(dir.path(), &["--out", "m", "synth"]));
    let loaded = load_bars(&dir.path().join("m/bars.csv"), BarFormat::Csv).unwrap();
    let generated = generate_market(&SynthConfig::default()).unwrap().panel;
    assert_eq!(loaded.calendar(), generated.calendar());
    assert_eq!(loaded.tickers(), generated.tickers());
    let a: Vec<_> = loaded.bars().collect();
    let b: Vec<_> = generated.bars().collect();
    assert_eq!(a, b);
}

#[test]
fn seed_flag_reproduces_files_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(statarb(dir.path(), &["--seed", "7", "--out", out, "synth"]));
    }
    ok(statarb(dir.path(), &["--seed", "8", "--out", "c", "synth"]));
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/bars.csv"), read("b/bars.csv"));
    assert_eq!(read("a/labels.csv"), read("b/labels.csv"));
    assert_ne!(read("a/bars.csv"), read("c/bars.csv"));
}

#[test]
fn single_strategy_grid_gives_one_row_and_one_plot() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        format!("grid = [\"C2C1_SIC_REG_Y\"]\n{SMALL}"),
    )
    .unwrap();
    for out in ["a", "b"] {
        ok(statarb(
            dir.path(),
            &[
                "--config", "c.toml", "--out", out, "--jobs", "1", "backtest",
            ],
        ));
    }
    let summary = std::fs::read_to_string(dir.path().join("a/summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "Return,Classification,OPT/REG,Costs,ROC,Sharpe,CPC,Drawdown"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("C2C1,SIC,REG,Y,"));

    let mut svgs = Vec::new();
    for entry in walk(&dir.path().join("a")) {
        if entry.extension().is_some_and(|e| e == "svg") {
            svgs.push(entry);
        }
    }
    assert_eq!(
        svgs,
        vec![dir.path().join("a/cells/C2C1_SIC_REG_Y/cumulative_pnl.svg")]
    );

    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/summary.csv"), read("b/summary.csv"));
    assert_eq!(
        read("a/cells/C2C1_SIC_REG_Y/daily_pnl.csv"),
        read("b/cells/C2C1_SIC_REG_Y/daily_pnl.csv")
    );

    // report rebuilds the summary from the daily files alone
    std::fs::remove_file(dir.path().join("a/summary.csv")).unwrap();
    ok(statarb(
        dir.path(),
        &["--config", "c.toml", "--out", "a", "report"],
    ));
    assert_eq!(read("a/summary.csv"), read("b/summary.csv"));
}

#[test]
fn failed_backtest_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bars.csv"),
        "date,ticker,open,close,volume\n2020-01-02,A,1,1,-5\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "bars = \"bars.csv\"\ngrid = \"D0_STAT_OPT_N\"\n",
    )
    .unwrap();
    let out = statarb(
        dir.path(),
        &["--config", "c.toml", "--out", "o", "backtest"],
    );
    assert!(!out.status.success());
    let left: Vec<_> = std::fs::read_dir(dir.path().join("o")).unwrap().collect();
    assert!(left.is_empty());
}

#[test]
fn missing_input_path_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "bars = \"absent.csv\"\n").unwrap();
    let out = statarb(dir.path(), &["--config", "c.toml", "backtest"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

fn walk(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(root).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}
