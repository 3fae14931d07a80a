//! Quasi-random grid calibration of GR4J with snow, and a look at the water
//! balance of the calibrated run.
//!
//! Run with `cargo run --release --example gr4j_calibration`.

use rnn_dynamics::hydro::{calibrate_grid, simulate, SyntheticCatchment};

fn main() -> rnn_dynamics::Result<()> {
    let catchment = SyntheticCatchment::new(1095, 5);
    let (records, _) = catchment.generate_with_truth()?;

    let result = calibrate_grid(&records, 5000, 5, 0..records.len())?;
    let truth = catchment.params;
    let best = result.best;
    println!("best RMSE {:.4} mm/d over {} points", result.best_rmse, result.points.len());
    println!("{:>6} {:>10} {:>10}", "param", "truth", "fitted");
    for (name, (t, f)) in ["x1", "x2", "x3", "x4", "tt", "cfmax", "cfr", "cwh"]
        .iter()
        .zip(truth.to_array().iter().zip(best.to_array()))
    {
        println!("{name:>6} {t:>10.3} {f:>10.3}");
    }

    let sim = simulate(&records, &best)?;
    let precip: f64 = records.iter().map(|r| r.precip).sum();
    let q: f64 = sim.q.iter().sum();
    let et: f64 = sim.actual_et.iter().sum();
    let exchange: f64 = sim.exchange.iter().sum();
    let residual = precip + exchange - q - et - (sim.final_storage - sim.initial_storage);
    println!("P {precip:.1}, Q {q:.1}, ET {et:.1}, F {exchange:.1}, balance residual {residual:.2e} mm");
    Ok(())
}
