//! Compare backpropagated gradients with central finite differences.
//!
//! Run with `cargo run --release --example gradient_check`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnn_dynamics::rnn::{batch_loss, bptt_grads, Activation, RnnConfig, RnnParams, SequenceBatch};

fn main() -> rnn_dynamics::Result<()> {
    let config = RnnConfig {
        input_size: 3,
        output_size: 2,
        hidden_size: 5,
        num_layers: 2,
        seq_len: 6,
        hidden_activation: Activation::Tanh,
        ..RnnConfig::lorenz()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut random = |r: usize, c: usize| Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0));
    let batch = SequenceBatch::new(
        (0..3).map(|_| random(config.seq_len, config.input_size)).collect(),
        (0..3).map(|_| random(config.seq_len, config.output_size)).collect(),
    )?;
    let params = RnnParams::init(&config, 7);
    let grads = bptt_grads(&params, &config, &batch)?;

    let h = 1e-5;
    let names = params.tensor_names();
    for (k, g) in grads.tensors().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let mut plus = params.clone();
            plus.tensors_mut()[k][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[k][i] -= h;
            let fd = (batch_loss(&plus, &config, &batch)? - batch_loss(&minus, &config, &batch)?) / (2.0 * h);
            worst = worst.max((g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-7));
        }
        println!("{:>10}: {} entries, worst relative error {worst:.2e}", names[k], g.len());
    }
    Ok(())
}
