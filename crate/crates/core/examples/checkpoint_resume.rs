//! Train briefly, save a checkpoint, reload it and check the predictions match.
//!
//! Run with `cargo run --release --example checkpoint_resume`.

use rnn_dynamics::lorenz::{generate_dataset, Integrator, LorenzParams};
use rnn_dynamics::rnn::{predict, train_two_pass, Checkpoint, ChannelScaler, RnnConfig, SequenceBatch};

fn main() -> rnn_dynamics::Result<()> {
    let system = LorenzParams {
        steps: 60,
        ..Default::default()
    };
    let data = generate_dataset(4, 3, &system, Integrator::Rk4, 9)?;
    let xs: Vec<_> = data.erroneous_orbits.iter().map(|o| o.to_matrix_from(1)).collect();
    let ys: Vec<_> = data.true_orbits.iter().map(|o| o.to_matrix_from(1)).collect();
    let sx = ChannelScaler::fit(&xs);
    let sy = ChannelScaler::fit(&ys);
    let inputs: Vec<_> = xs.iter().map(|x| sx.apply(x)).collect();

    let config = RnnConfig {
        seq_len: system.steps,
        hidden_size: 8,
        max_epochs: 30,
        ..RnnConfig::lorenz()
    };
    let batch = SequenceBatch::new(inputs.clone(), ys.iter().map(|y| sy.apply(y)).collect())?;
    let outcome = train_two_pass(&config, &batch)?;

    let path = std::env::temp_dir().join("rnn_dynamics_checkpoint.json");
    Checkpoint::new(config.clone(), outcome.params.clone(), outcome.adam.clone(), outcome.best_epoch)
        .with_scalers(sx, sy)
        .save(&path)?;
    let restored = Checkpoint::load(&path)?;

    let before = predict(&outcome.params, &config, &inputs)?;
    let after = predict(&restored.params, &restored.config, &inputs)?;
    println!(
        "saved epoch {} to {}; predictions identical after reload: {}",
        restored.epoch,
        path.display(),
        before == after
    );
    Ok(())
}
