//! Recover clean swarm trajectories from noisy observations.
//!
//! Run with `cargo run --release --example swarm_denoise`.

use rnn_dynamics::rnn::{predict, rmse, train_two_pass, ChannelScaler, RnnConfig, SecondPass, SequenceBatch};
use rnn_dynamics::swarm::{add_noise, simulate_swarm, spiral_schedule, SwarmConfig};

fn main() -> rnn_dynamics::Result<()> {
    let swarm = SwarmConfig {
        rng_seed: 3,
        ..Default::default()
    };
    let run = simulate_swarm(&swarm, &spiral_schedule(swarm.steps)?)?;
    let sigma = 0.4;
    let noisy = add_noise(&run.trajectories, sigma, 4)?;

    let ys = run.trajectories.to_matrices();
    let xs = noisy.to_matrices();
    let train = 24;
    let sx = ChannelScaler::fit(&xs[..train]);
    let sy = ChannelScaler::fit(&ys[..train]);

    // desk-scale training budget; the full-size default runs for hours
    let config = RnnConfig {
        max_epochs: 200,
        second_pass: SecondPass::Snapshot,
        ..RnnConfig::swarm()
    };
    let batch = SequenceBatch::new(
        xs[..train].iter().map(|x| sx.apply(x)).collect(),
        ys[..train].iter().map(|y| sy.apply(y)).collect(),
    )?;
    let outcome = train_two_pass(&config, &batch)?;

    let held_out: Vec<_> = xs[train..].iter().map(|x| sx.apply(x)).collect();
    let denoised: Vec<_> = predict(&outcome.params, &config, &held_out)?.iter().map(|p| sy.invert(p)).collect();
    println!(
        "sigma = {sigma}: noisy RMSE {:.3}, denoised RMSE {:.3} on {} held-out agents",
        rmse(&xs[train..], &ys[train..])?,
        rmse(&denoised, &ys[train..])?,
        ys.len() - train
    );
    Ok(())
}
