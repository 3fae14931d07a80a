use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => a.tanh(),
            Activation::Relu => a.max(0.0),
        }
    }

    /// Derivative expressed through the preactivation `a` and its image `h = f(a)`.
    #[inline]
    pub fn derivative(self, a: f64, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// How many sequences contribute to one optimizer update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// One update per epoch, gradient of the loss over the whole training set.
    FullBatch,
    /// One update per training sequence, in dataset order.
    PerInstance,
}

/// How the second pass of [`train_two_pass`](super::train_two_pass) obtains
/// the parameters at the best epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondPass {
    /// Re-initialise from the seed and train again for `best_epoch` epochs.
    Retrain,
    /// Keep the pass-one parameters recorded at `best_epoch`. Bitwise equal to
    /// `Retrain` because training is deterministic, at half the cost.
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnConfig {
    pub seq_len: usize,
    pub input_size: usize,
    pub output_size: usize,
    pub num_layers: usize,
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub hidden_activation: Activation,
    pub rng_seed: u64,
    pub batch_mode: BatchMode,
    #[serde(default = "default_second_pass")]
    pub second_pass: SecondPass,
    #[serde(default)]
    pub adam: AdamConfig,
}

fn default_second_pass() -> SecondPass {
    SecondPass::Retrain
}

impl RnnConfig {
    /// Lorenz settings: 5000 steps, 3 in / 3 out,
    /// learning rate 0.01, three layers of 128 ReLU units, whole dataset per batch.
    pub fn lorenz() -> Self {
        RnnConfig {
            seq_len: 5000,
            input_size: 3,
            output_size: 3,
            num_layers: 3,
            hidden_size: 128,
            learning_rate: 0.01,
            max_epochs: 930,
            hidden_activation: Activation::Relu,
            rng_seed: 0,
            batch_mode: BatchMode::FullBatch,
            second_pass: SecondPass::Retrain,
            adam: AdamConfig::default(),
        }
    }

    /// Collective-motion settings: 201 steps, 2 in / 2 out, learning rate 5e-4,
    /// two layers of 64 tanh units, one trajectory per batch.
    pub fn swarm() -> Self {
        RnnConfig {
            seq_len: 201,
            input_size: 2,
            output_size: 2,
            num_layers: 2,
            hidden_size: 64,
            learning_rate: 0.0005,
            max_epochs: 14032,
            hidden_activation: Activation::Tanh,
            rng_seed: 0,
            batch_mode: BatchMode::PerInstance,
            second_pass: SecondPass::Retrain,
            adam: AdamConfig::default(),
        }
    }

    /// Rainfall-runoff settings: window length 45, 2 in / 1 out, learning rate 1e-3,
    /// three layers of 512 tanh units.
    pub fn hydro() -> Self {
        RnnConfig {
            seq_len: 45,
            input_size: 2,
            output_size: 1,
            num_layers: 3,
            hidden_size: 512,
            learning_rate: 0.001,
            max_epochs: 99994,
            hidden_activation: Activation::Tanh,
            rng_seed: 0,
            batch_mode: BatchMode::FullBatch,
            second_pass: SecondPass::Retrain,
            adam: AdamConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("seq_len", self.seq_len),
            ("input_size", self.input_size),
            ("output_size", self.output_size),
            ("num_layers", self.num_layers),
            ("hidden_size", self.hidden_size),
            ("max_epochs", self.max_epochs),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.epsilon > 0.0) {
            return Err(Error::Config("adam betas must lie in [0, 1) and epsilon > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        let l = RnnConfig::lorenz();
        assert_eq!((l.seq_len, l.input_size, l.output_size), (5000, 3, 3));
        assert_eq!((l.num_layers, l.hidden_size), (3, 128));
        assert_eq!(l.learning_rate, 0.01);
        assert_eq!(l.hidden_activation, Activation::Relu);

        let s = RnnConfig::swarm();
        assert_eq!((s.seq_len, s.input_size, s.output_size), (201, 2, 2));
        assert_eq!((s.num_layers, s.hidden_size), (2, 64));
        assert_eq!(s.learning_rate, 0.0005);
        assert_eq!(s.hidden_activation, Activation::Tanh);

        let h = RnnConfig::hydro();
        assert_eq!((h.input_size, h.output_size, h.hidden_size), (2, 1, 512));
        assert_eq!(h.learning_rate, 0.001);
        assert_eq!(h.hidden_activation, Activation::Tanh);
    }

    #[test]
    fn rejects_zero_sizes_and_bad_rate() {
        let mut c = RnnConfig::swarm();
        c.hidden_size = 0;
        assert!(c.validate().is_err());
        let mut c = RnnConfig::swarm();
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        assert!(RnnConfig::hydro().validate().is_ok());
    }
}
