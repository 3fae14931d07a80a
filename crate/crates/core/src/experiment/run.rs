use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::data::{
    read_orbits, read_trajectories, write_flow_series, write_orbits, write_trajectories, FlowRow, Manifest,
    SequenceFile,
};
use super::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::hydro::{
    calibrate_grid, forecast_with, gr4j_baseline, hydro_pipeline, read_records, write_calibration_report, write_records,
    CalibrationResult, HydroRecord,
};
use crate::lorenz::generate_dataset;
use crate::rng::sub_seed;
use crate::rnn::{predict, rmse, train_two_pass, ChannelScaler, Checkpoint, SequenceBatch};
use crate::swarm::{add_noise, simulate_swarm, spiral_schedule, SwarmConfig};

pub const REPORT_FORMAT: &str = "rnn-dynamics-report";
const REPORT_VERSION: u32 = 1;

pub(crate) const MANIFEST: &str = "manifest.json";
pub(crate) const CHECKPOINT: &str = "checkpoint.json";
pub(crate) const REPORT: &str = "report.json";
const CATCHMENT: &str = "catchment.csv";

fn orbit_true_file() -> String {
    "orbits_true.csv".into()
}

fn orbit_erroneous_file(eta: usize) -> String {
    format!("orbits_erroneous_eta{eta}.csv")
}

fn clean_file() -> String {
    "trajectories_clean.csv".into()
}

fn noisy_file(sigma: f64) -> String {
    format!("trajectories_noisy_sigma{sigma}.csv")
}

/// Seeds handed to TOML must fit in an i64.
pub(crate) fn toml_seed(seed: u64, index: u64) -> u64 {
    sub_seed(seed, index) >> 1
}

fn noise_seed(seed: u64, sigma: f64) -> u64 {
    toml_seed(seed, sigma.to_bits())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Writes the dataset described by `cfg` into `out` plus a manifest. Returns
/// the written file paths.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    create_dir(out)?;
    let mut files = Vec::new();
    match cfg.experiment {
        Experiment::Lorenz => {
            let s = cfg.lorenz_section()?;
            let ds = generate_dataset(s.n_orbits, s.eta, &s.system, s.integrator, cfg.seed)?;
            let ids: Vec<usize> = (0..s.n_orbits).collect();
            let truth = ds.true_orbits.iter().map(|o| o.to_matrix()).collect();
            let err = ds.erroneous_orbits.iter().map(|o| o.to_matrix()).collect();
            write_orbits(&out.join(orbit_true_file()), &SequenceFile::new(ids.clone(), 0, truth))?;
            write_orbits(&out.join(orbit_erroneous_file(s.eta)), &SequenceFile::new(ids, 0, err))?;
            files.push(orbit_true_file());
            files.push(orbit_erroneous_file(s.eta));
        }
        Experiment::Swarm => {
            let s = cfg.swarm_section()?;
            let sim = SwarmConfig {
                rng_seed: cfg.seed,
                ..s.simulation.clone()
            };
            let run = simulate_swarm(&sim, &spiral_schedule(sim.steps)?)?;
            let noisy = add_noise(&run.trajectories, s.sigma, noise_seed(cfg.seed, s.sigma))?;
            let ids: Vec<usize> = (0..sim.n_agents).collect();
            let clean = SequenceFile::new(ids.clone(), 0, run.trajectories.to_matrices());
            write_trajectories(&out.join(clean_file()), &clean)?;
            write_trajectories(&out.join(noisy_file(s.sigma)), &SequenceFile::new(ids, 0, noisy.to_matrices()))?;
            files.push(clean_file());
            files.push(noisy_file(s.sigma));
        }
        Experiment::Hydro => {
            let s = cfg.hydro_section()?;
            if let Some(path) = &s.data_file {
                return Err(Error::Config(format!(
                    "hydro.data_file is set to {}; nothing to generate",
                    path.display()
                )));
            }
            let mut catchment = s.catchment.clone();
            catchment.seed = cfg.seed;
            write_records(&out.join(CATCHMENT), &catchment.generate()?)?;
            files.push(CATCHMENT.into());
        }
    }
    Manifest {
        seed: cfg.seed,
        files: files.clone(),
        config: cfg.clone(),
    }
    .save(&out.join(MANIFEST))?;
    info!("generated {} in {}", files.join(", "), out.display());
    Ok(files.into_iter().map(|f| out.join(f)).collect())
}

/// Paths of everything a run wrote or read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub checkpoint: PathBuf,
    pub loss_history: PathBuf,
    /// Network inputs (erroneous orbits or noisy trajectories), or the forcing file.
    pub inputs: PathBuf,
    /// Ground truth the RMSEs are measured against.
    pub truth: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_predictions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_predictions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modeled_flow: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_flow: Option<PathBuf>,
}

/// Summary of one training run, written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub experiment: Experiment,
    pub loss_history: Vec<f64>,
    pub best_epoch: usize,
    pub train_rmse: f64,
    /// Test-set RMSE, or forecast-span RMSE for streamflow.
    pub test_rmse: f64,
    /// The same score for the uncorrected inputs, or for calibrated GR4J.
    pub baseline_rmse: f64,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
    pub artifacts: Artifacts,
}

impl RunReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read report {}: {e}", path.display())))?;
        let r: RunReport = serde_json::from_str(&text)?;
        if r.format != REPORT_FORMAT || r.version != REPORT_VERSION {
            return Err(Error::Data(format!("{}: not a version {REPORT_VERSION} run report", path.display())));
        }
        Ok(r)
    }
}

/// Network inputs and labels with the ids and files they came from.
pub(crate) struct SequenceData {
    pub ids: Vec<usize>,
    pub first_step: usize,
    pub inputs: Vec<Array2<f64>>,
    pub labels: Vec<Array2<f64>>,
    pub n_train: usize,
    pub input_file: PathBuf,
    pub truth_file: PathBuf,
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Data(format!("missing dataset file {}; run generate first", path.display())))
    }
}

pub(crate) fn load_sequences(cfg: &ExperimentConfig, data: &Path) -> Result<SequenceData> {
    let (input_file, truth_file, first, len, n_train, inputs, truth) = match cfg.experiment {
        Experiment::Lorenz => {
            let s = cfg.lorenz_section()?;
            let input_file = require(data.join(orbit_erroneous_file(s.eta)))?;
            let truth_file = require(data.join(orbit_true_file()))?;
            let inputs = read_orbits(&input_file)?;
            let truth = read_orbits(&truth_file)?;
            // the state at t = 0 is shared by both orbits and carries no error
            (input_file, truth_file, 1, s.system.steps, s.n_train, inputs, truth)
        }
        Experiment::Swarm => {
            let s = cfg.swarm_section()?;
            let input_file = require(data.join(noisy_file(s.sigma)))?;
            let truth_file = require(data.join(clean_file()))?;
            let inputs = read_trajectories(&input_file)?;
            let truth = read_trajectories(&truth_file)?;
            (input_file, truth_file, 0, s.simulation.steps, s.n_train, inputs, truth)
        }
        Experiment::Hydro => return Err(Error::Config("streamflow data is not a sequence set".into())),
    };
    if inputs.ids != truth.ids {
        return Err(Error::Data(format!(
            "{} and {} hold different sequence ids",
            input_file.display(),
            truth_file.display()
        )));
    }
    if n_train >= inputs.ids.len() {
        return Err(Error::Data(format!(
            "{} sequences leave no test set after {n_train} training sequences",
            inputs.ids.len()
        )));
    }
    Ok(SequenceData {
        ids: inputs.ids.clone(),
        first_step: first,
        inputs: inputs.steps(first, len)?,
        labels: truth.steps(first, len)?,
        n_train,
        input_file,
        truth_file,
    })
}

pub(crate) fn load_records(cfg: &ExperimentConfig, data: &Path) -> Result<(PathBuf, Vec<HydroRecord>)> {
    let s = cfg.hydro_section()?;
    let path = match &s.data_file {
        Some(p) => require(p.clone())?,
        None => require(data.join(CATCHMENT))?,
    };
    let records = read_records(&path)?;
    if s.train_days >= records.len() {
        return Err(Error::Data(format!(
            "{} has {} days; training span needs {} plus forecast days",
            path.display(),
            records.len(),
            s.train_days
        )));
    }
    Ok((path, records))
}

fn write_loss_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "loss"])?;
    for (i, l) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{l:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn flow_rows(records: &[HydroRecord], modeled: &[f64], train_days: usize) -> Vec<FlowRow> {
    records
        .iter()
        .zip(modeled)
        .enumerate()
        .map(|(i, (r, &m))| FlowRow {
            date: r.date,
            span: if i < train_days { "train" } else { "forecast" }.into(),
            observed: r.flow,
            modeled: m,
            residual: r.flow.map(|q| (q - m).abs()),
        })
        .collect()
}

/// Two-pass training on the dataset in `data`; writes checkpoint, predictions
/// and `report.json` into `out`.
pub fn cmd_train(cfg: &ExperimentConfig, data: &Path, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    create_dir(out)?;
    let started = Instant::now();
    let checkpoint_path = out.join(CHECKPOINT);
    let loss_path = out.join("loss_history.csv");
    let report = match cfg.experiment {
        Experiment::Lorenz | Experiment::Swarm => {
            let d = load_sequences(cfg, data)?;
            let n = d.n_train;
            let input_scaler = ChannelScaler::fit(&d.inputs[..n]);
            let output_scaler = ChannelScaler::fit(&d.labels[..n]);
            let scaled: Vec<_> = d.inputs.iter().map(|x| input_scaler.apply(x)).collect();
            let batch = SequenceBatch::new(
                scaled[..n].to_vec(),
                d.labels[..n].iter().map(|y| output_scaler.apply(y)).collect(),
            )?;
            info!("training {} on {n} sequences for up to {} epochs", cfg.experiment, cfg.rnn.max_epochs);
            let outcome = train_two_pass(&cfg.rnn, &batch)?;
            let preds: Vec<_> = predict(&outcome.params, &cfg.rnn, &scaled)?
                .iter()
                .map(|y| output_scaler.invert(y))
                .collect();
            let train_rmse = rmse(&preds[..n], &d.labels[..n])?;
            let test_rmse = rmse(&preds[n..], &d.labels[n..])?;
            let baseline_rmse = rmse(&d.inputs[n..], &d.labels[n..])?;

            let (train_pred, test_pred) = (out.join("predictions_train.csv"), out.join("predictions_test.csv"));
            let write: fn(&Path, &SequenceFile) -> Result<()> = match cfg.experiment {
                Experiment::Lorenz => write_orbits,
                _ => write_trajectories,
            };
            write(&train_pred, &SequenceFile::new(d.ids[..n].to_vec(), d.first_step, preds[..n].to_vec()))?;
            write(&test_pred, &SequenceFile::new(d.ids[n..].to_vec(), d.first_step, preds[n..].to_vec()))?;
            Checkpoint::new(cfg.rnn.clone(), outcome.params, outcome.adam, outcome.best_epoch)
                .with_scalers(input_scaler, output_scaler)
                .save(&checkpoint_path)?;
            RunReport {
                format: REPORT_FORMAT.into(),
                version: REPORT_VERSION,
                experiment: cfg.experiment,
                best_epoch: outcome.best_epoch,
                loss_history: outcome.loss_history,
                train_rmse,
                test_rmse,
                baseline_rmse,
                wall_clock_seconds: 0.0,
                config: cfg.clone(),
                artifacts: Artifacts {
                    checkpoint: checkpoint_path,
                    loss_history: loss_path.clone(),
                    inputs: d.input_file,
                    truth: d.truth_file,
                    train_predictions: Some(train_pred),
                    test_predictions: Some(test_pred),
                    modeled_flow: None,
                    baseline_flow: None,
                },
            }
        }
        Experiment::Hydro => {
            let s = cfg.hydro_section()?;
            let (data_path, records) = load_records(cfg, data)?;
            info!(
                "training on {}-day windows of the first {} of {} days",
                s.window_len,
                s.train_days,
                records.len()
            );
            let run = hydro_pipeline(&records, s.window_len, s.train_days, &cfg.rnn)?;
            info!("calibrating GR4J on {} grid points", s.calibration_points);
            let base = gr4j_baseline(&records, s.train_days, s.calibration_points, cfg.seed)?;
            let modeled_path = out.join("modeled_flow.csv");
            let baseline_path = out.join("gr4j_flow.csv");
            write_flow_series(&modeled_path, &flow_rows(&records, &run.forecast.modeled, s.train_days))?;
            write_flow_series(&baseline_path, &flow_rows(&records, &base.forecast.modeled, s.train_days))?;
            Checkpoint::new(run.config.clone(), run.training.params, run.training.adam, run.training.best_epoch)
                .with_scalers(run.input_scaler, run.output_scaler)
                .save(&checkpoint_path)?;
            RunReport {
                format: REPORT_FORMAT.into(),
                version: REPORT_VERSION,
                experiment: cfg.experiment,
                best_epoch: run.training.best_epoch,
                loss_history: run.training.loss_history,
                train_rmse: run.forecast.train_rmse,
                test_rmse: run.forecast.forecast_rmse,
                baseline_rmse: base.forecast.forecast_rmse,
                wall_clock_seconds: 0.0,
                config: cfg.clone(),
                artifacts: Artifacts {
                    checkpoint: checkpoint_path,
                    loss_history: loss_path.clone(),
                    inputs: data_path.clone(),
                    truth: data_path,
                    train_predictions: None,
                    test_predictions: None,
                    modeled_flow: Some(modeled_path),
                    baseline_flow: Some(baseline_path),
                },
            }
        }
    };
    write_loss_history(&loss_path, &report.loss_history)?;
    let report = RunReport {
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        ..report
    };
    report.save(&out.join(REPORT))?;
    info!(
        "best epoch {}: train RMSE {:.4}, test RMSE {:.4}, baseline {:.4}",
        report.best_epoch, report.train_rmse, report.test_rmse, report.baseline_rmse
    );
    Ok(report)
}

/// Scores of a checkpoint on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    /// `(split, sequences or observed days, rmse, rmse of the raw inputs)`.
    pub rows: Vec<(String, usize, f64, Option<f64>)>,
}

/// Applies a saved checkpoint to the dataset in `data`; writes predictions
/// (streamflow: the modelled series with residuals) and `eval_rmse.csv`.
pub fn cmd_eval(cfg: &ExperimentConfig, checkpoint: &Path, data: &Path, out: &Path) -> Result<EvalSummary> {
    cfg.validate()?;
    create_dir(out)?;
    let ck = Checkpoint::load(checkpoint)?;
    let (input_scaler, output_scaler) = match (ck.input_scaler.clone(), ck.output_scaler.clone()) {
        (Some(i), Some(o)) => (i, o),
        _ => (
            ChannelScaler::identity(ck.config.input_size),
            ChannelScaler::identity(ck.config.output_size),
        ),
    };
    let mut rows = Vec::new();
    match cfg.experiment {
        Experiment::Lorenz | Experiment::Swarm => {
            let d = load_sequences(cfg, data)?;
            let n = d.n_train;
            let scaled: Vec<_> = d.inputs[n..].iter().map(|x| input_scaler.apply(x)).collect();
            let preds: Vec<_> = predict(&ck.params, &ck.config, &scaled)
                .map_err(|e| match e {
                    Error::Shape(m) => Error::Data(format!("checkpoint does not fit the data: {m}")),
                    other => other,
                })?
                .iter()
                .map(|y| output_scaler.invert(y))
                .collect();
            let file = SequenceFile::new(d.ids[n..].to_vec(), d.first_step, preds.clone());
            match cfg.experiment {
                Experiment::Lorenz => write_orbits(&out.join("eval_predictions.csv"), &file)?,
                _ => write_trajectories(&out.join("eval_predictions.csv"), &file)?,
            }
            rows.push((
                "test".to_string(),
                preds.len(),
                rmse(&preds, &d.labels[n..])?,
                Some(rmse(&d.inputs[n..], &d.labels[n..])?),
            ));
        }
        Experiment::Hydro => {
            let s = cfg.hydro_section()?;
            let (_, records) = load_records(cfg, data)?;
            let fc = forecast_with(&records, ck.config.seq_len, s.train_days, |w| {
                let scaled: Vec<_> = w.inputs.iter().map(|x| input_scaler.apply(x)).collect();
                Ok(predict(&ck.params, &ck.config, &scaled)?.iter().map(|y| output_scaler.invert(y)).collect())
            })?;
            write_flow_series(&out.join("eval_flow.csv"), &flow_rows(&records, &fc.modeled, s.train_days))?;
            let observed = |r: &[HydroRecord]| r.iter().filter(|d| d.flow.is_some()).count();
            rows.push(("train".into(), observed(&records[..s.train_days]), fc.train_rmse, None));
            rows.push(("forecast".into(), observed(&records[s.train_days..]), fc.forecast_rmse, None));
        }
    }
    let mut w = csv::Writer::from_path(out.join("eval_rmse.csv"))?;
    w.write_record(["split", "count", "rmse", "baseline_rmse"])?;
    for (split, n, r, b) in &rows {
        let b = b.map(|b| format!("{b:.16e}")).unwrap_or_default();
        w.write_record([split.clone(), n.to_string(), format!("{r:.16e}"), b])?;
    }
    w.flush()?;
    Ok(EvalSummary { rows })
}

/// Grid calibration of GR4J on the training span; writes `calibration_report.csv`.
pub fn cmd_calibrate(cfg: &ExperimentConfig, data: &Path, out: &Path) -> Result<CalibrationResult> {
    cfg.validate()?;
    create_dir(out)?;
    let s = cfg.hydro_section()?;
    let (_, records) = load_records(cfg, data)?;
    info!("evaluating {} parameter sets on {} days", s.calibration_points, s.train_days);
    let result = calibrate_grid(&records, s.calibration_points, cfg.seed, 0..s.train_days)?;
    write_calibration_report(&out.join("calibration_report.csv"), &result.points)?;
    info!("best RMSE {:.4} at {:?}", result.best_rmse, result.best);
    Ok(result)
}
