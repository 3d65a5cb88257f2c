use std::path::PathBuf;

use goodexec::strategies::{Criterion, StrategyTag};
use goodexec_harness::{ingest_csv, CsvFormat, HarnessError, ModelSpec, ScenarioConfig};
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn empty_config_is_the_bridge_scenario() {
    let c = ScenarioConfig::parse("# nothing but a comment\n\n").unwrap();
    assert_eq!(c, ScenarioConfig::default());
    assert_eq!(
        c.model,
        ModelSpec::Bridge {
            s0: 103.893,
            face_value: 100.0,
            sigma: 1.1642,
            maturity: 1.0
        }
    );
    assert_eq!(c.params.initial_inventory, 1000.0);
    assert_eq!(c.params.impact, 0.05855);
    assert_eq!(c.params.risk, 0.07341);
    assert_eq!(c.criterion, Criterion::Quadratic);
}

#[test]
fn config_values_are_read() {
    let c = ScenarioConfig::parse(
        "model = ou-jump  # log-price model\n\
         alpha = 3\n\
         marks = normal\n\
         criterion = value-at-risk\n\
         strategies = good-var-closed, static, twap\n\
         grid = 64\n\
         paths = 7\n\
         seed = 9\n",
    )
    .unwrap();
    assert!(matches!(c.model, ModelSpec::OuJump { alpha, normal_marks: true, .. } if alpha == 3.0));
    assert_eq!(c.criterion, Criterion::ValueAtRisk);
    assert_eq!(
        c.strategies,
        vec![StrategyTag::GoodVarClosed, StrategyTag::Static, StrategyTag::Twap]
    );
    assert_eq!((c.grid, c.paths, c.seed), (64, 7, 9));
}

fn config_error_line(text: &str) -> usize {
    match ScenarioConfig::parse(text) {
        Err(HarnessError::Config { line, .. }) => line,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_name_their_line() {
    assert_eq!(config_error_line("grid = 10\nwobble = 3\n"), 2);
    assert_eq!(config_error_line("seed = 1\n\nseed = 2\n"), 3);
    assert_eq!(config_error_line("paths = many\n"), 1);
    assert_eq!(config_error_line("# header\njust words\n"), 2);
    assert_eq!(config_error_line("criterion = cheapest\n"), 1);
    assert_eq!(config_error_line("model = ou-jump\nmarks = uniform\n"), 2);
    assert_eq!(config_error_line("strategies = static, static\n"), 1);
    assert_eq!(config_error_line("strategies = static, magic\n"), 1);
}

#[test]
fn invalid_settings_are_rejected() {
    assert!(ScenarioConfig::parse("paths = 0\n").is_err());
    assert!(ScenarioConfig::parse("grid = 1\n").is_err());
    assert!(ScenarioConfig::parse("impact = 0\n").is_err());
    assert!(ScenarioConfig::parse("strategies = terminal-penalty\n").is_err());
    assert!(ScenarioConfig::parse("strategies = terminal-penalty\nterminal_penalty = 0.1\n").is_ok());
}

#[test]
fn time_price_rows_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let s = ingest_csv(&write(&dir, "a.csv", "0,100\n1,101\n"), &CsvFormat::TimePrice).unwrap();
    assert_eq!(s.times(), &[0.0, 1.0]);
    assert_eq!(s.prices(), &[100.0, 101.0]);
    let s = ingest_csv(
        &write(&dir, "b.csv", "time,price\n0.5, 10\n\n2.5,11\n"),
        &CsvFormat::TimePrice,
    )
    .unwrap();
    assert_eq!(s.times(), &[0.5, 2.5]);
}

#[test]
fn equal_timestamps_keep_the_last_price() {
    let dir = tempfile::tempdir().unwrap();
    let s = ingest_csv(
        &write(&dir, "a.csv", "0,100\n1,101\n1,102\n2,103\n"),
        &CsvFormat::TimePrice,
    )
    .unwrap();
    assert_eq!(s.times(), &[0.0, 1.0, 2.0]);
    assert_eq!(s.prices(), &[100.0, 102.0, 103.0]);
}

fn parse_error_line(text: &str) -> u64 {
    let dir = tempfile::tempdir().unwrap();
    match ingest_csv(&write(&dir, "bad.csv", text), &CsvFormat::TimePrice) {
        Err(HarnessError::Parse { line, .. }) => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn bad_rows_name_their_line() {
    assert_eq!(parse_error_line("0,100\n1,-5\n"), 2);
    assert_eq!(parse_error_line("0,100\n1,0\n"), 2);
    assert_eq!(parse_error_line("time,price\n0,100\n2,101\n1,102\n"), 4);
    assert_eq!(parse_error_line("0,100\n1,abc\n"), 2);
    assert_eq!(parse_error_line("0,100\n1\n"), 2);
}

#[test]
fn empty_and_missing_files_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = ingest_csv(&write(&dir, "empty.csv", ""), &CsvFormat::TimePrice).unwrap_err();
    assert_eq!(empty.exit_code(), 2);
    let header_only = ingest_csv(&write(&dir, "h.csv", "time,price\n"), &CsvFormat::TimePrice).unwrap_err();
    assert!(matches!(header_only, HarnessError::Invalid(_)));
    let missing = ingest_csv(&dir.path().join("nope.csv"), &CsvFormat::TimePrice).unwrap_err();
    assert!(matches!(missing, HarnessError::Io { .. }));
    assert_eq!(missing.exit_code(), 3);
}

#[test]
fn lobster_mid_prices() {
    let dir = tempfile::tempdir().unwrap();
    let messages = write(
        &dir,
        "msg.csv",
        "34200.01,1,1,100,1000000,1\n34200.02,1,2,50,999900,-1\n34200.05,3,1,100,1000000,1\n34200.07,1,3,10,1000100,1\n",
    );
    let book = write(
        &dir,
        "book.csv",
        "1000000,100,999800,200\n1000000,100,999900,50\n9999999999,0,999900,50\n1000100,10,999900,50\n",
    );
    let s = ingest_csv(&messages, &CsvFormat::LobsterMid { orderbook: book }).unwrap();
    assert_eq!(s.times(), &[34200.01, 34200.02, 34200.07]);
    assert_eq!(s.prices(), &[99.99, 99.995, 100.0]);

    let short = write(&dir, "short.csv", "1000000,100,999800,200\n");
    assert!(ingest_csv(&messages, &CsvFormat::LobsterMid { orderbook: short }).is_err());
}
