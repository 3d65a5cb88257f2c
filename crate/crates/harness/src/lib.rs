//! Command-line harness: scenario configuration, CSV ingestion, Monte Carlo
//! runs over common price paths, and plot-data output.

pub mod backtest;
pub mod config;
pub mod error;
pub mod ingest;
pub mod plotdata;
pub mod scenario;

pub use backtest::{backtest, CalibrationReport};
pub use config::{ModelSpec, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use ingest::{ingest_csv, CsvFormat};
pub use plotdata::{emit_plotdata, trajectory_file_name, SUMMARY_FILE, TRAJECTORY_HEADER};
pub use scenario::{run_scenario, RunArtifact, StrategySummary, TrajectoryPanel};
