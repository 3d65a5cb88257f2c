use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use goodexec::calibration::calibrate;
use goodexec::strategies::StrategyTag;
use goodexec_harness::{
    backtest, emit_plotdata, ingest_csv, run_scenario, CalibrationReport, CsvFormat, HarnessError, Result, RunArtifact,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "goodexec",
    version,
    about = "Liquidation schedules that adapt to the realized price path"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Number of grid intervals.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write one CSV per simulated path.
    #[arg(long, global = true)]
    dump_trajectories: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    TimePrice,
    Lobster,
}

#[derive(Args)]
struct SeriesArgs {
    /// Price file: `time,price` rows, or a LOBSTER message file.
    csv: PathBuf,
    #[arg(long, value_enum, default_value = "time-price")]
    format: Format,
    /// LOBSTER orderbook file matching the message file.
    #[arg(long, required_if_eq("format", "lobster"))]
    orderbook: Option<PathBuf>,
    /// Moving-average window for the reversion target; a tenth of the span by default.
    #[arg(long)]
    window: Option<f64>,
    /// Jump threshold in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    k: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write one plot panel per path.
    Simulate,
    /// Simulate paths and report cost and liquidation statistics.
    Montecarlo,
    /// Run every applicable strategy on common paths and tabulate costs.
    Compare,
    /// Run the strategies on an observed price series.
    Backtest(SeriesArgs),
    /// Fit the mean-reverting jump model to an observed price series.
    Calibrate(SeriesArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut config = match &common.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(paths) = common.paths {
        config.paths = paths;
    }
    if let Some(grid) = common.grid {
        config.grid = grid;
    }
    if let Some(out) = &common.out {
        config.out = out.clone();
    }
    config.dump_trajectories |= common.dump_trajectories;
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.common)?;
    match cli.command {
        Command::Simulate => {
            config.dump_trajectories = true;
            finish(&run_scenario(&config)?, &config.out)
        }
        Command::Montecarlo => finish(&run_scenario(&config)?, &config.out),
        Command::Compare => {
            config.strategies = comparison_set(&config);
            finish(&run_scenario(&config)?, &config.out)
        }
        Command::Backtest(args) => {
            let series = read_series(&args)?;
            let window = args.window.unwrap_or_else(|| default_window(&series));
            config.dump_trajectories = true;
            let (artifact, cal) = backtest(&config, &series, window, args.k)?;
            write_json(
                &config.out,
                "calibration.json",
                &CalibrationReport::new(&series, &cal, window, args.k),
            )?;
            finish(&artifact, &config.out)
        }
        Command::Calibrate(args) => {
            let series = read_series(&args)?;
            let window = args.window.unwrap_or_else(|| default_window(&series));
            let cal = calibrate(&series, window, args.k)?;
            let report = CalibrationReport::new(&series, &cal, window, args.k);
            println!(
                "alpha {:.6}  sigma {:.6}  lambda {:.6}  mark size {:.6}  jumps {}{}",
                report.alpha,
                report.sigma,
                report.lambda,
                report.mark_size,
                report.jumps,
                if report.boundary {
                    "  (alpha at resolution limit)"
                } else {
                    ""
                }
            );
            write_json(&config.out, "calibration.json", &report)
        }
    }
}

fn comparison_set(config: &ScenarioConfig) -> Vec<StrategyTag> {
    let mut tags = vec![
        StrategyTag::good_closed(config.criterion),
        StrategyTag::good_ivp(config.criterion),
        StrategyTag::Static,
        StrategyTag::APosteriori,
        StrategyTag::Twap,
    ];
    if config.params.terminal_penalty > 0.0 {
        tags.push(StrategyTag::TerminalPenalty);
    }
    tags
}

fn read_series(args: &SeriesArgs) -> Result<goodexec::calibration::MidPriceSeries> {
    let format = match args.format {
        Format::TimePrice => CsvFormat::TimePrice,
        Format::Lobster => CsvFormat::LobsterMid {
            orderbook: args
                .orderbook
                .clone()
                .ok_or_else(|| HarnessError::Invalid("--orderbook is required".into()))?,
        },
    };
    ingest_csv(&args.csv, &format)
}

fn default_window(series: &goodexec::calibration::MidPriceSeries) -> f64 {
    let t = series.times();
    0.1 * (t[t.len() - 1] - t[0])
}

fn write_json(out: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let file = out.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&file, text).map_err(|e| HarnessError::Io { path: file, source: e })
}

fn finish(artifact: &RunArtifact, out: &Path) -> Result<()> {
    println!(
        "{} paths, {} grid intervals, criterion {}",
        artifact.paths, artifact.grid, artifact.criterion
    );
    println!(
        "{:<22} {:>16} {:>12} {:>14} {:>14}",
        "strategy", "mean cost", "stderr", "mean q_T err", "var q_T"
    );
    for s in &artifact.strategies {
        println!(
            "{:<22} {:>16.6} {:>12.6} {:>14.6e} {:>14.6e}",
            s.tag.as_str(),
            s.cost.mean,
            s.cost.stderr,
            s.liquidation.error.mean,
            s.liquidation.error.variance
        );
    }
    let files = emit_plotdata(artifact, out)?;
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}
