use std::path::Path;

use super::data::{read_flow_series, read_orbits, read_trajectories, SequenceFile};
use super::run::RunReport;
use super::Experiment;
use crate::error::{Error, Result};
use crate::rnn::{best_epoch, rmse, Checkpoint};

/// Reported values next to their recomputation from the artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    /// `(quantity, reported, recomputed)`.
    pub checks: Vec<(String, f64, f64)>,
}

/// Relative tolerance for a recomputed score.
const TOLERANCE: f64 = 1e-12;

impl Verification {
    pub fn failures(&self) -> Vec<&(String, f64, f64)> {
        self.checks
            .iter()
            .filter(|(_, a, b)| !((a - b).abs() <= TOLERANCE * a.abs().max(b.abs()) || a == b))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

fn read_seqs(experiment: Experiment, path: &Path) -> Result<SequenceFile> {
    match experiment {
        Experiment::Lorenz => read_orbits(path),
        _ => read_trajectories(path),
    }
}

/// Rows of `truth` aligned with `pred` by id and step.
fn aligned(pred: &SequenceFile, truth: &SequenceFile) -> Result<Vec<ndarray::Array2<f64>>> {
    let len = pred.seqs.first().map_or(0, |s| s.nrows());
    let all = truth.steps(pred.first_step, len)?;
    pred.ids
        .iter()
        .map(|id| {
            truth
                .ids
                .iter()
                .position(|t| t == id)
                .map(|i| all[i].clone())
                .ok_or_else(|| Error::Data(format!("sequence {id} missing from the truth file")))
        })
        .collect()
}

fn flow_rmse(path: &Path, span: &str) -> Result<f64> {
    let rows = read_flow_series(path)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in rows.iter().filter(|r| r.span == span) {
        if let Some(q) = r.observed {
            sum += (r.modeled - q).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Data(format!("{}: no observed {span} days", path.display())));
    }
    Ok((sum / n as f64).sqrt())
}

fn need<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Data(format!("report lists no {what}")))
}

/// Recomputes every number in a run report from the files it lists.
pub fn verify_report(path: &Path) -> Result<Verification> {
    let report = RunReport::load(path)?;
    let a = &report.artifacts;
    let mut checks = vec![(
        "best_epoch".to_string(),
        report.best_epoch as f64,
        best_epoch(&report.loss_history) as f64,
    )];

    let mut reader = csv::Reader::from_path(&a.loss_history)?;
    let mut logged = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        logged.push(rec[1].parse::<f64>().map_err(|_| Error::Data("bad loss value".into()))?);
    }
    if logged.len() != report.loss_history.len() {
        return Err(Error::Data(format!(
            "{} has {} epochs, report has {}",
            a.loss_history.display(),
            logged.len(),
            report.loss_history.len()
        )));
    }
    let worst = logged
        .iter()
        .zip(&report.loss_history)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    checks.push(("loss_history max relative difference".into(), 0.0, worst));

    let ck = Checkpoint::load(&a.checkpoint)?;
    checks.push(("checkpoint epoch".into(), report.best_epoch as f64, ck.epoch as f64));

    match report.experiment {
        Experiment::Lorenz | Experiment::Swarm => {
            let truth = read_seqs(report.experiment, &a.truth)?;
            let inputs = read_seqs(report.experiment, &a.inputs)?;
            let train = read_seqs(report.experiment, need(&a.train_predictions, "train predictions")?)?;
            let test = read_seqs(report.experiment, need(&a.test_predictions, "test predictions")?)?;
            checks.push(("train_rmse".into(), report.train_rmse, rmse(&train.seqs, &aligned(&train, &truth)?)?));
            checks.push(("test_rmse".into(), report.test_rmse, rmse(&test.seqs, &aligned(&test, &truth)?)?));
            let raw = aligned(&test, &inputs)?;
            checks.push(("baseline_rmse".into(), report.baseline_rmse, rmse(&raw, &aligned(&test, &truth)?)?));
        }
        Experiment::Hydro => {
            let modeled = need(&a.modeled_flow, "modelled flow")?;
            let baseline = need(&a.baseline_flow, "baseline flow")?;
            checks.push(("train_rmse".into(), report.train_rmse, flow_rmse(modeled, "train")?));
            checks.push(("test_rmse".into(), report.test_rmse, flow_rmse(modeled, "forecast")?));
            checks.push(("baseline_rmse".into(), report.baseline_rmse, flow_rmse(baseline, "forecast")?));
        }
    }
    Ok(Verification { checks })
}
