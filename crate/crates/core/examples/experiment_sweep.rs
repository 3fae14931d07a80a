//! Run a small window-length sweep through the experiment layer, the same path
//! the command-line tool takes.
//!
//! Run with `cargo run --release --example experiment_sweep`.

use rnn_dynamics::experiment::{cmd_sweep, Experiment, ExperimentConfig, SweepAxis, SweepSpec};

fn main() -> rnn_dynamics::Result<()> {
    let mut config = ExperimentConfig::desk(Experiment::Hydro);
    let hydro = config.hydro.as_mut().unwrap();
    hydro.catchment.days = 600;
    hydro.train_days = 450;
    hydro.calibration_points = 500;
    config.rnn.hidden_size = 8;
    config.rnn.max_epochs = 60;
    config.sweep = Some(SweepSpec {
        axis: SweepAxis::Window,
        values: vec![10.0, 30.0, 60.0],
    });

    let out = std::env::temp_dir().join("rnn_dynamics_sweep");
    let rows = cmd_sweep(&config, &out, 1)?;
    for row in &rows {
        println!(
            "L = {:>3}: {} forecast RMSE {:.3}, GR4J {:.3}",
            row.value,
            row.status,
            row.test_rmse.unwrap_or(f64::NAN),
            row.baseline_rmse.unwrap_or(f64::NAN)
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
