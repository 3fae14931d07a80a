#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnn_dynamics::rnn::{mse_loss, predict, Activation, BatchMode, RnnConfig, RnnParams, SecondPass, SequenceBatch};

pub fn small_config(k: usize, nh: usize, t: usize, ni: usize, no: usize, act: Activation) -> RnnConfig {
    RnnConfig {
        seq_len: t,
        input_size: ni,
        output_size: no,
        num_layers: k,
        hidden_size: nh,
        learning_rate: 0.01,
        max_epochs: 1,
        hidden_activation: act,
        rng_seed: 0,
        batch_mode: BatchMode::FullBatch,
        second_pass: SecondPass::Retrain,
        adam: Default::default(),
    }
}

pub fn random_batch(cfg: &RnnConfig, n: usize, seed: u64) -> SequenceBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = (0..n)
        .map(|_| Array2::from_shape_fn((cfg.seq_len, cfg.input_size), |_| rng.gen_range(-1.5..1.5)))
        .collect();
    let ys = (0..n)
        .map(|_| Array2::from_shape_fn((cfg.seq_len, cfg.output_size), |_| rng.gen_range(-1.0..1.0)))
        .collect();
    SequenceBatch::new(xs, ys).unwrap()
}

/// Perturbs every entry, including biases, so no gradient is trivially zero.
pub fn random_params(cfg: &RnnConfig, seed: u64) -> RnnParams {
    let mut p = RnnParams::init(cfg, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    for t in p.tensors_mut() {
        t.iter_mut().for_each(|v| *v += rng.gen_range(-0.2..0.2));
    }
    p
}

pub fn loss_of(p: &RnnParams, cfg: &RnnConfig, batch: &SequenceBatch) -> f64 {
    let out = predict(p, cfg, &batch.inputs).unwrap();
    mse_loss(&out, &batch.labels).unwrap()
}

/// Central finite differences of the loss with respect to every scalar.
pub fn finite_difference_grad(p: &RnnParams, cfg: &RnnConfig, batch: &SequenceBatch, h: f64) -> Vec<Vec<f64>> {
    let shapes: Vec<usize> = p.tensors().iter().map(|t| t.len()).collect();
    let mut out = Vec::new();
    for (ti, &len) in shapes.iter().enumerate() {
        let mut g = Vec::with_capacity(len);
        for i in 0..len {
            let mut plus = p.clone();
            plus.tensors_mut()[ti][i] += h;
            let mut minus = p.clone();
            minus.tensors_mut()[ti][i] -= h;
            g.push((loss_of(&plus, cfg, batch) - loss_of(&minus, cfg, batch)) / (2.0 * h));
        }
        out.push(g);
    }
    out
}

/// Relative discrepancy with a small absolute floor on the denominator.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-7)
}

/// Textbook scalar ADAM, written independently of the library.
pub fn scalar_adam(grads: &[f64], lr: f64) -> Vec<f64> {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
    let (mut x, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
    let mut trace = Vec::new();
    for (i, g) in grads.iter().enumerate() {
        let t = (i + 1) as i32;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let mh = m / (1.0 - b1.powi(t));
        let vh = v / (1.0 - b2.powi(t));
        x -= lr * mh / (vh.sqrt() + eps);
        trace.push(x);
    }
    trace
}
