//! Checkpoint container.
//!
//! A checkpoint is one UTF-8 JSON document:
//!
//! ```text
//! {
//!   "format": "rnn-dynamics-checkpoint",
//!   "version": 1,
//!   "epoch": <epochs trained>,
//!   "config": { RnnConfig fields },
//!   "params": { "w_in": {"v":1,"dim":[N_h,N_i],"data":[...]}, ... },
//!   "adam": { "m": {...}, "v": {...}, "step_count": n, "beta1": .., "beta2": .., "epsilon": .. },
//!   "input_scaler": {"mean":[..],"std":[..]} | null,
//!   "output_scaler": {"mean":[..],"std":[..]} | null
//! }
//! ```
//!
//! Matrices are row-major. Floats are written in shortest round-trip form and
//! parsed with correct rounding, so `save` then `load` is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::config::RnnConfig;
use super::params::RnnParams;
use super::scaler::ChannelScaler;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "rnn-dynamics-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub epoch: usize,
    pub config: RnnConfig,
    pub params: RnnParams,
    pub adam: AdamState,
    #[serde(default)]
    pub input_scaler: Option<ChannelScaler>,
    #[serde(default)]
    pub output_scaler: Option<ChannelScaler>,
}

impl Checkpoint {
    pub fn new(config: RnnConfig, params: RnnParams, adam: AdamState, epoch: usize) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            epoch,
            config,
            params,
            adam,
            input_scaler: None,
            output_scaler: None,
        }
    }

    pub fn with_scalers(mut self, input: ChannelScaler, output: ChannelScaler) -> Self {
        self.input_scaler = Some(input);
        self.output_scaler = Some(output);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Data(format!("not a checkpoint: format {:?}", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Data(format!("unsupported checkpoint version {}", ck.version)));
        }
        ck.config.validate()?;
        ck.params.check(&ck.config)?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::config::AdamConfig;
    use crate::rnn::adam::adam_step;

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = RnnConfig {
            hidden_size: 7,
            ..RnnConfig::lorenz()
        };
        let mut params = RnnParams::init(&cfg, 99);
        let mut adam = AdamState::new(&params, AdamConfig::default());
        let grad = RnnParams::init(&cfg, 100);
        adam_step(&mut params, &grad, &mut adam, 0.01).unwrap();
        let ck = Checkpoint::new(cfg, params, adam, 1)
            .with_scalers(ChannelScaler::identity(3), ChannelScaler::identity(3));
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        for (a, b) in ck.params.tensors().iter().zip(back.params.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(ck, back);
    }

    #[test]
    fn rejects_foreign_format() {
        let cfg = RnnConfig {
            hidden_size: 2,
            ..RnnConfig::swarm()
        };
        let p = RnnParams::zeros(&cfg);
        let a = AdamState::new(&p, AdamConfig::default());
        let mut ck = Checkpoint::new(cfg, p, a, 0);
        ck.format = "other".into();
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
        ck.format = CHECKPOINT_FORMAT.into();
        ck.version = 9;
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
    }
}
