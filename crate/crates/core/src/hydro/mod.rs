//! Daily rainfall-runoff modelling: GR4J with degree-day snow, grid
//! calibration, sliding windows and the RNN forecasting pipeline.

mod calibrate;
mod io;
mod model;
mod params;
mod pipeline;
mod synthetic;
mod window;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_grid, calibration_rmse, halton, grid_points, CalibrationResult, GridPoint};
pub use io::{read_calibration_report, read_records, write_calibration_report, write_records};
pub use model::{
    gr4j_step, run_gr4j, simulate, simulate_from, snow_step, Gr4jState, Simulation, StepFluxes, UnitHydrographs,
    WARMUP_DAYS,
};
pub use params::{Gr4jParams, PARAM_RANGES};
pub use pipeline::{forecast_with, gr4j_baseline, hydro_pipeline, ForecastOutcome, Gr4jBaseline, HydroRun};
pub use synthetic::SyntheticCatchment;
pub use window::{make_windows, reconstruct_from_windows, WindowSet};

/// One day of forcing and, when observed, streamflow. All water in mm/day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroRecord {
    pub day_index: usize,
    pub date: NaiveDate,
    pub precip: f64,
    pub pet: f64,
    /// Daily mean air temperature (°C).
    pub temp: f64,
    pub flow: Option<f64>,
}

/// Observed flow with missing days as NaN.
pub fn observed_flow(records: &[HydroRecord]) -> Vec<f64> {
    records.iter().map(|r| r.flow.unwrap_or(f64::NAN)).collect()
}
