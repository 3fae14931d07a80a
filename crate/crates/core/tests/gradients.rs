mod common;

use common::*;
use rnn_dynamics::rnn::{adam_step, bptt_grads, Activation, AdamConfig, AdamState, RnnParams};

#[test]
fn bptt_matches_finite_differences() {
    for (k, act) in [(1, Activation::Tanh), (2, Activation::Tanh), (3, Activation::Tanh), (2, Activation::Relu)] {
        let cfg = small_config(k, 3, 4, 2, 2, act);
        let batch = random_batch(&cfg, 2, 10 + k as u64);
        let p = random_params(&cfg, 20 + k as u64);
        let g = bptt_grads(&p, &cfg, &batch).unwrap();
        let fd = finite_difference_grad(&p, &cfg, &batch, 1e-5);
        let mut worst: f64 = 0.0;
        for (name, (a, b)) in g.tensor_names().iter().zip(g.tensors().iter().zip(&fd)) {
            for (x, y) in a.iter().zip(b.iter()) {
                let e = rel_err(*x, *y);
                assert!(e <= 1e-5, "{name}: bptt {x} vs fd {y} (rel {e})");
                worst = worst.max(e);
            }
        }
        println!("K={k} {act:?}: worst relative error {worst:.2e}");
    }
}

#[test]
fn zero_residual_gives_zero_gradient() {
    let cfg = small_config(2, 4, 3, 2, 2, Activation::Tanh);
    let mut batch = random_batch(&cfg, 3, 1);
    batch.labels.iter_mut().for_each(|y| y.fill(0.0));
    let g = bptt_grads(&RnnParams::zeros(&cfg), &cfg, &batch).unwrap();
    assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
}

#[test]
fn doubled_residual_doubles_gradient() {
    let cfg = small_config(2, 3, 4, 2, 2, Activation::Tanh);
    let batch = random_batch(&cfg, 2, 5);
    let p = random_params(&cfg, 6);
    let g = bptt_grads(&p, &cfg, &batch).unwrap();
    let outputs = rnn_dynamics::rnn::predict(&p, &cfg, &batch.inputs).unwrap();
    // y -> 2y - ŷ doubles the residual ŷ - y; y -> 2ŷ - y negates it.
    let mut doubled = batch.clone();
    let mut mirrored = batch.clone();
    for ((d, m), y_hat) in doubled.labels.iter_mut().zip(mirrored.labels.iter_mut()).zip(&outputs) {
        *d = &*d * 2.0 - y_hat;
        *m = y_hat * 2.0 - &*m;
    }
    let g2 = bptt_grads(&p, &cfg, &doubled).unwrap();
    let gm = bptt_grads(&p, &cfg, &mirrored).unwrap();
    for ((a, b), c) in g.tensors().iter().zip(g2.tensors()).zip(gm.tensors()) {
        for ((x, y), z) in a.iter().zip(b).zip(c) {
            assert!((2.0 * x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{x} {y}");
            assert!((x + z).abs() <= 1e-12 * (1.0 + x.abs()), "{x} {z}");
        }
    }
}

#[test]
fn adam_matches_scalar_oracle() {
    let cfg = small_config(1, 1, 1, 1, 1, Activation::Tanh);
    let mut p = RnnParams::zeros(&cfg);
    let mut s = AdamState::new(&p, AdamConfig::default());
    let grads = [1.0, -2.0, 0.5];
    let want = scalar_adam(&grads, 0.01);
    for (g, w) in grads.iter().zip(want) {
        let mut gp = p.zeros_like();
        gp.b_out[0] = *g;
        adam_step(&mut p, &gp, &mut s, 0.01).unwrap();
        assert!((p.b_out[0] - w).abs() <= 1e-12);
    }
    assert_eq!(s.step_count, 3);
}
