//! Learn to map orbits of a perturbed Lorenz system back onto the true system.
//!
//! Run with `cargo run --release --example lorenz_correction`.

use rnn_dynamics::lorenz::{generate_dataset, Integrator, LorenzParams};
use rnn_dynamics::rnn::{predict, rmse, train_two_pass, ChannelScaler, RnnConfig, SecondPass, SequenceBatch};

fn main() -> rnn_dynamics::Result<()> {
    let system = LorenzParams {
        steps: 200,
        ..Default::default()
    };
    let eta = 5;
    let data = generate_dataset(20, eta, &system, Integrator::Rk4, 42)?;

    // the initial condition is shared, so drop it
    let xs: Vec<_> = data.erroneous_orbits.iter().map(|o| o.to_matrix_from(1)).collect();
    let ys: Vec<_> = data.true_orbits.iter().map(|o| o.to_matrix_from(1)).collect();
    let (train, test) = (16, 4);

    let sx = ChannelScaler::fit(&xs[..train]);
    let sy = ChannelScaler::fit(&ys[..train]);
    let scaled = |s: &ChannelScaler, v: &[_]| v.iter().map(|m| s.apply(m)).collect::<Vec<_>>();

    let config = RnnConfig {
        seq_len: system.steps,
        hidden_size: 24,
        max_epochs: 300,
        second_pass: SecondPass::Snapshot,
        ..RnnConfig::lorenz()
    };
    let batch = SequenceBatch::new(scaled(&sx, &xs[..train]), scaled(&sy, &ys[..train]))?;
    let outcome = train_two_pass(&config, &batch)?;

    let predicted: Vec<_> = predict(&outcome.params, &config, &scaled(&sx, &xs[train..]))?
        .iter()
        .map(|p| sy.invert(p))
        .collect();
    let corrected = rmse(&predicted, &ys[train..])?;
    let raw = rmse(&xs[train..], &ys[train..])?;
    println!("eta = {eta}, best epoch {} of {}", outcome.best_epoch, config.max_epochs);
    println!("held-out RMSE: erroneous {raw:.3}, corrected {corrected:.3} ({test} orbits)");
    Ok(())
}
