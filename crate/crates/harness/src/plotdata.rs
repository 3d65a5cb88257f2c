//! Plot data on disk: one CSV per trajectory panel and a JSON summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::scenario::{RunArtifact, TrajectoryPanel};

pub const TRAJECTORY_HEADER: &str = "t,price,expected_price,q_static,q_good,q_aposteriori,rate_good";
pub const SUMMARY_FILE: &str = "summary.json";

pub fn trajectory_file_name(path_index: usize) -> String {
    format!("trajectory_{path_index:05}.csv")
}

/// Writes the panels and `summary.json` into `out`, creating it if needed,
/// and returns the written files in order. Numbers use 17 significant digits.
pub fn emit_plotdata(artifact: &RunArtifact, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut written = Vec::with_capacity(artifact.trajectories.len() + 1);
    for panel in &artifact.trajectories {
        let file = out.join(trajectory_file_name(panel.path_index));
        std::fs::write(&file, render_panel(panel)).map_err(|e| HarnessError::io(&file, e))?;
        written.push(file);
    }
    let file = out.join(SUMMARY_FILE);
    let mut json = serde_json::to_string_pretty(artifact)?;
    json.push('\n');
    std::fs::write(&file, json).map_err(|e| HarnessError::io(&file, e))?;
    written.push(file);
    Ok(written)
}

fn render_panel(panel: &TrajectoryPanel) -> String {
    let mut text = String::with_capacity(panel.times.len() * 7 * 24 + 64);
    text.push_str(TRAJECTORY_HEADER);
    text.push('\n');
    let columns = [
        &panel.times,
        &panel.price,
        &panel.expected_price,
        &panel.q_static,
        &panel.q_good,
        &panel.q_aposteriori,
        &panel.rate_good,
    ];
    for i in 0..panel.times.len() {
        for (k, column) in columns.iter().enumerate() {
            if k > 0 {
                text.push(',');
            }
            write!(text, "{:.16e}", column[i]).expect("writing to a string");
        }
        text.push('\n');
    }
    text
}
