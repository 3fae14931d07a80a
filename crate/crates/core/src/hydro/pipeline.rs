use std::ops::Range;

use ndarray::Array2;

use super::calibrate::{calibrate_grid, CalibrationResult};
use super::model::run_gr4j;
use super::params::Gr4jParams;
use super::window::{make_windows, reconstruct_from_windows, WindowSet};
use super::HydroRecord;
use crate::error::{Error, Result};
use crate::rnn::{predict, train_two_pass, ChannelScaler, RnnConfig, TrainOutcome};

/// A reconstructed daily series scored on the training and forecast spans.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    pub modeled: Vec<f64>,
    pub train_days: usize,
    pub train_rmse: f64,
    pub forecast_rmse: f64,
}

fn span_rmse(modeled: &[f64], records: &[HydroRecord], span: Range<usize>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in span.clone() {
        if let Some(q) = records[i].flow {
            sum += (modeled[i] - q).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Data(format!("no observed flow in days {span:?}")));
    }
    Ok((sum / n as f64).sqrt())
}

fn check_split(records: &[HydroRecord], window_len: usize, train_days: usize) -> Result<()> {
    if train_days < window_len || train_days >= records.len() {
        return Err(Error::Config(format!(
            "training span of {train_days} days must hold a {window_len}-day window and leave forecast days out of {}",
            records.len()
        )));
    }
    Ok(())
}

/// Builds windows over the whole record, asks `predictor` for one flow window
/// per input window, averages overlaps and scores both spans.
pub fn forecast_with<F>(records: &[HydroRecord], window_len: usize, train_days: usize, predictor: F) -> Result<ForecastOutcome>
where
    F: FnOnce(&WindowSet) -> Result<Vec<Array2<f64>>>,
{
    check_split(records, window_len, train_days)?;
    let windows = make_windows(records, window_len, 0..records.len())?;
    let preds = predictor(&windows)?;
    let modeled = reconstruct_from_windows(&preds, &windows.start_indices, records.len())?;
    Ok(ForecastOutcome {
        train_rmse: span_rmse(&modeled, records, 0..train_days)?,
        forecast_rmse: span_rmse(&modeled, records, train_days..records.len())?,
        modeled,
        train_days,
    })
}

/// Everything produced by one windowed RNN run.
#[derive(Debug, Clone)]
pub struct HydroRun {
    pub config: RnnConfig,
    pub training: TrainOutcome,
    pub input_scaler: ChannelScaler,
    pub output_scaler: ChannelScaler,
    pub forecast: ForecastOutcome,
}

/// Trains on every window inside the first `train_days` days, then forecasts
/// the full record. Inputs and flow are standardized with training-span
/// statistics; `rnn` supplies everything but the sequence and channel sizes.
pub fn hydro_pipeline(records: &[HydroRecord], window_len: usize, train_days: usize, rnn: &RnnConfig) -> Result<HydroRun> {
    check_split(records, window_len, train_days)?;
    let train = &records[..train_days];
    if let Some(r) = train.iter().find(|r| r.flow.is_none()) {
        return Err(Error::Data(format!("flow missing on training day {}", r.day_index)));
    }
    let forcing = Array2::from_shape_fn((train_days, 2), |(t, c)| if c == 0 { train[t].precip } else { train[t].pet });
    let flow = Array2::from_shape_fn((train_days, 1), |(t, _)| train[t].flow.unwrap_or(f64::NAN));
    let input_scaler = ChannelScaler::fit([&forcing]);
    let output_scaler = ChannelScaler::fit([&flow]);

    let config = RnnConfig {
        seq_len: window_len,
        input_size: 2,
        output_size: 1,
        ..rnn.clone()
    };
    config.validate()?;
    let windows = make_windows(records, window_len, 0..train_days)?;
    let batch = crate::rnn::SequenceBatch::new(
        windows.inputs.iter().map(|x| input_scaler.apply(x)).collect(),
        windows.labels.iter().map(|y| output_scaler.apply(y)).collect(),
    )?;
    let training = train_two_pass(&config, &batch)?;

    let forecast = forecast_with(records, window_len, train_days, |all| {
        let scaled: Vec<_> = all.inputs.iter().map(|x| input_scaler.apply(x)).collect();
        Ok(predict(&training.params, &config, &scaled)?.iter().map(|y| output_scaler.invert(y)).collect())
    })?;
    Ok(HydroRun {
        config,
        training,
        input_scaler,
        output_scaler,
        forecast,
    })
}

/// GR4J calibrated on the training span and run over the full record.
#[derive(Debug, Clone)]
pub struct Gr4jBaseline {
    pub calibration: CalibrationResult,
    pub params: Gr4jParams,
    pub forecast: ForecastOutcome,
}

pub fn gr4j_baseline(records: &[HydroRecord], train_days: usize, n_points: usize, seed: u64) -> Result<Gr4jBaseline> {
    check_split(records, 1, train_days)?;
    let calibration = calibrate_grid(records, n_points, seed, 0..train_days)?;
    let params = calibration.best;
    let modeled = run_gr4j(records, &params)?;
    let forecast = ForecastOutcome {
        train_rmse: calibration.best_rmse,
        forecast_rmse: span_rmse(&modeled, records, train_days..records.len())?,
        modeled,
        train_days,
    };
    Ok(Gr4jBaseline {
        calibration,
        params,
        forecast,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::SyntheticCatchment;

    #[test]
    fn label_feedback_is_exact() {
        let recs = SyntheticCatchment::new(120, 4).generate().unwrap();
        let out = forecast_with(&recs, 15, 90, |w| Ok(w.labels.clone())).unwrap();
        assert_eq!(out.forecast_rmse, 0.0);
        assert_eq!(out.train_rmse, 0.0);
    }

    #[test]
    fn bad_split_rejected() {
        let recs = SyntheticCatchment::new(50, 4).generate().unwrap();
        assert!(forecast_with(&recs, 10, 50, |w| Ok(w.labels.clone())).is_err());
        assert!(forecast_with(&recs, 30, 20, |w| Ok(w.labels.clone())).is_err());
    }
}
