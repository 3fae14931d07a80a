use log::debug;

use super::adam::{adam_step, AdamState};
use super::config::{BatchMode, RnnConfig, SecondPass};
use super::grad::{batch_loss, loss_and_grad, SequenceBatch};
use super::params::RnnParams;
use crate::error::{Error, Result};

/// Result of [`train_two_pass`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: RnnParams,
    pub adam: AdamState,
    /// Training loss after each epoch of the first pass; entry `e - 1`
    /// belongs to epoch `e`.
    pub loss_history: Vec<f64>,
    /// One-based epoch with the smallest loss in `loss_history`.
    pub best_epoch: usize,
}

/// One-based index of the smallest entry; ties go to the earliest epoch.
pub fn best_epoch(history: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in history.iter().enumerate() {
        if l < history[best] {
            best = i;
        }
    }
    best + 1
}

fn numeric_to_epoch(err: Error, epoch: usize) -> Error {
    match err {
        Error::NumericOverflow { .. } | Error::NonFiniteGradient { .. } => Error::NonFiniteLoss { epoch },
        other => other,
    }
}

/// Trains from a fresh initialization for `epochs` epochs. `observe` sees the
/// epoch number, the loss after that epoch, and the parameters that produced it.
pub fn train_epochs(
    config: &RnnConfig,
    train: &SequenceBatch,
    epochs: usize,
    mut observe: impl FnMut(usize, f64, &RnnParams),
) -> Result<(RnnParams, AdamState, Vec<f64>)> {
    config.validate()?;
    train.check(config)?;
    let mut params = RnnParams::init(config, config.rng_seed);
    let mut adam = AdamState::new(&params, config.adam);
    let mut history = Vec::with_capacity(epochs);
    let all: Vec<usize> = (0..train.len()).collect();

    let mut record = |epoch: usize, loss: f64, params: &RnnParams, history: &mut Vec<f64>| -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        if epoch.is_multiple_of(100) || epoch == 1 {
            debug!("epoch {epoch}: loss {loss:.6e}");
        }
        history.push(loss);
        observe(epoch, loss, params);
        Ok(())
    };

    match config.batch_mode {
        BatchMode::FullBatch => {
            for epoch in 1..=epochs {
                let (loss_prev, grad) =
                    loss_and_grad(&params, config, train, &all).map_err(|e| numeric_to_epoch(e, epoch))?;
                if epoch > 1 {
                    record(epoch - 1, loss_prev, &params, &mut history)?;
                }
                adam_step(&mut params, &grad, &mut adam, config.learning_rate)?;
            }
        }
        BatchMode::PerInstance => {
            for epoch in 1..=epochs {
                for i in 0..train.len() {
                    let (_, grad) =
                        loss_and_grad(&params, config, train, &[i]).map_err(|e| numeric_to_epoch(e, epoch))?;
                    adam_step(&mut params, &grad, &mut adam, config.learning_rate)?;
                }
                if epoch < epochs {
                    let loss = batch_loss(&params, config, train).map_err(|e| numeric_to_epoch(e, epoch))?;
                    record(epoch, loss, &params, &mut history)?;
                }
            }
        }
    }
    if epochs > 0 {
        let loss = batch_loss(&params, config, train).map_err(|e| numeric_to_epoch(e, epochs))?;
        record(epochs, loss, &params, &mut history)?;
    }
    Ok((params, adam, history))
}

/// Two-pass epoch selection: train for `max_epochs` recording the loss, pick
/// the epoch with the smallest loss, then produce the parameters after exactly
/// that many epochs.
pub fn train_two_pass(config: &RnnConfig, train: &SequenceBatch) -> Result<TrainOutcome> {
    let mut snapshot: Option<(usize, f64, RnnParams)> = None;
    let keep = config.second_pass == SecondPass::Snapshot;
    let (last_params, last_adam, history) = train_epochs(config, train, config.max_epochs, |epoch, loss, p| {
        if keep && snapshot.as_ref().is_none_or(|(_, best, _)| loss < *best) {
            snapshot = Some((epoch, loss, p.clone()));
        }
    })?;
    let best = best_epoch(&history);
    debug!("best epoch {best} of {} (loss {:.6e})", history.len(), history[best - 1]);

    let (params, adam) = if best == config.max_epochs {
        (last_params, last_adam)
    } else {
        match config.second_pass {
            SecondPass::Snapshot => {
                let (epoch, _, params) = snapshot.expect("at least one epoch recorded");
                debug_assert_eq!(epoch, best);
                // Moments are not needed for evaluation; a resumed run restarts them.
                let adam = AdamState::new(&params, config.adam);
                (params, adam)
            }
            SecondPass::Retrain => {
                let (params, adam, _) = train_epochs(config, train, best, |_, _, _| {})?;
                (params, adam)
            }
        }
    };
    Ok(TrainOutcome {
        params,
        adam,
        loss_history: history,
        best_epoch: best,
    })
}
