//! solution.csv and report.json.
//!
//! CSV columns: `segment,t,psi_t,u,w`, one row per node, floats in shortest
//! round-trip form (`inf` for the unbounded u(a) when ϱ < 1).

use std::path::Path;

use psifrac::solver::{ConditionReport, GridSolution};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub segment: usize,
    pub t: f64,
    pub psi_t: f64,
    pub u: f64,
    pub w: f64,
}

pub fn solution_rows(sol: &GridSolution) -> Vec<SolutionRow> {
    let grid = sol.grid();
    (0..grid.len())
        .map(|j| SolutionRow {
            segment: grid.segment_of(j),
            t: grid.t()[j],
            psi_t: grid.s()[j],
            u: sol.u_at(j),
            w: sol.w()[j],
        })
        .collect()
}

pub fn write_solution_csv(path: &Path, sol: &GridSolution) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in solution_rows(sol) {
        wtr.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_solution_csv(path: &Path) -> Result<Vec<SolutionRow>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        CliError::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// Outcome of `solve`, written next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub problem_sha256: String,
    pub status: String,
    pub nodes_per_segment: usize,
    pub segments: usize,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub update_norms: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub wall_time_s: f64,
    pub conditions: serde_json::Value,
}

impl SolveReport {
    pub fn new(
        problem_sha256: &str,
        nodes_per_segment: usize,
        segments: usize,
        conditions: &ConditionReport,
    ) -> Self {
        SolveReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            problem_sha256: problem_sha256.to_string(),
            status: String::new(),
            nodes_per_segment,
            segments,
            iterations: 0,
            final_update_norm: f64::NAN,
            update_norms: Vec::new(),
            contraction_ratios: Vec::new(),
            wall_time_s: 0.0,
            conditions: serde_json::to_value(conditions).expect("condition report serializes"),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
