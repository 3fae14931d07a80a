//! Windowed streamflow forecast on a synthetic catchment, next to a calibrated
//! GR4J baseline.
//!
//! Run with `cargo run --release --example hydro_forecast`.

use rnn_dynamics::hydro::{gr4j_baseline, hydro_pipeline, SyntheticCatchment};
use rnn_dynamics::rnn::{RnnConfig, SecondPass};

fn main() -> rnn_dynamics::Result<()> {
    let records = SyntheticCatchment::new(700, 11).generate()?;
    let train_days = 500;
    let window = 30;

    let config = RnnConfig {
        hidden_size: 12,
        max_epochs: 150,
        second_pass: SecondPass::Snapshot,
        ..RnnConfig::hydro()
    };
    let run = hydro_pipeline(&records, window, train_days, &config)?;
    let baseline = gr4j_baseline(&records, train_days, 2000, 11)?;

    println!("window {window} days, {train_days} training days, {} forecast days", records.len() - train_days);
    println!(
        "RNN  train RMSE {:.3} mm/d, forecast RMSE {:.3} mm/d",
        run.forecast.train_rmse, run.forecast.forecast_rmse
    );
    println!(
        "GR4J train RMSE {:.3} mm/d, forecast RMSE {:.3} mm/d (x1 = {:.0}, x4 = {:.2})",
        baseline.forecast.train_rmse, baseline.forecast.forecast_rmse, baseline.params.x1, baseline.params.x4
    );
    Ok(())
}
