use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::run::{cmd_eval, cmd_generate, cmd_train, toml_seed, CHECKPOINT};
use super::{Experiment, ExperimentConfig, SweepAxis, SweepSpec};
use crate::error::{Error, Result};

/// One line of the aggregated sweep CSV. Failed cells carry the error text
/// and empty scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub status: String,
    pub best_epoch: Option<usize>,
    pub train_rmse: Option<f64>,
    pub test_rmse: Option<f64>,
    pub baseline_rmse: Option<f64>,
    pub error: String,
}

fn axis_experiment(axis: SweepAxis) -> Experiment {
    match axis {
        SweepAxis::Eta => Experiment::Lorenz,
        SweepAxis::Sigma => Experiment::Swarm,
        SweepAxis::Window => Experiment::Hydro,
    }
}

/// Configuration of the cell at `value`: the base configuration with the
/// axis set and a network seed derived from the value.
pub fn cell_config(base: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.rnn.rng_seed = toml_seed(base.rnn.rng_seed, value.to_bits());
    let whole = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("{axis} values must be whole numbers, got {v}")))
        }
    };
    match axis {
        SweepAxis::Eta => cfg.lorenz.as_mut().ok_or_else(|| Error::Config("missing [lorenz] section".into()))?.eta = whole(value)?,
        SweepAxis::Sigma => cfg.swarm.as_mut().ok_or_else(|| Error::Config("missing [swarm] section".into()))?.sigma = value,
        SweepAxis::Window => {
            let l = whole(value)?;
            cfg.hydro.as_mut().ok_or_else(|| Error::Config("missing [hydro] section".into()))?.window_len = l;
            cfg.rnn.seq_len = l;
        }
    }
    Ok(cfg)
}

fn run_cell(cfg: &ExperimentConfig, dir: &Path) -> Result<(usize, f64, f64, f64)> {
    std::fs::create_dir_all(dir)?;
    cfg.save(&dir.join("config.toml"))?;
    let data = dir.join("data");
    if cfg.experiment != Experiment::Hydro || cfg.hydro_section()?.data_file.is_none() {
        cmd_generate(cfg, &data)?;
    }
    let report = cmd_train(cfg, &data, dir)?;
    cmd_eval(cfg, &dir.join(CHECKPOINT), &data, &dir.join("eval"))?;
    Ok((report.best_epoch, report.train_rmse, report.test_rmse, report.baseline_rmse))
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Runs generate, train and eval for every value of the sweep axis on up to
/// `jobs` threads, each cell in its own directory under `out`, and writes
/// `sweep_<axis>.csv` ordered by axis value. The CSV holds no timings, so
/// re-running the written `sweep_config.toml` reproduces it byte for byte.
pub fn cmd_sweep(base: &ExperimentConfig, out: &Path, jobs: usize) -> Result<Vec<SweepRow>> {
    base.validate()?;
    let spec = base.sweep.clone().unwrap_or_else(|| SweepSpec::default_for(base.experiment));
    if axis_experiment(spec.axis) != base.experiment {
        return Err(Error::Config(format!("axis {} does not apply to {}", spec.axis, base.experiment)));
    }
    let mut values = spec.values.clone();
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep values must be finite and non-empty".into()));
    }
    values.sort_by(f64::total_cmp);
    if values.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("sweep values must be distinct".into()));
    }
    let cells = values
        .iter()
        .map(|&v| cell_config(base, spec.axis, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>>>()?;

    std::fs::create_dir_all(out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", out.display())))?;
    let echo = ExperimentConfig {
        sweep: Some(spec.clone()),
        output_dir: out.to_path_buf(),
        ..base.clone()
    };
    echo.save(&out.join("sweep_config.toml"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|(v, cfg)| {
                let dir = out.join(format!("{}_{}", spec.axis, fmt_value(*v)));
                info!("sweep cell {}={}", spec.axis, fmt_value(*v));
                match run_cell(cfg, &dir) {
                    Ok((best, train, test, baseline)) => SweepRow {
                        axis: spec.axis,
                        value: *v,
                        status: "ok".into(),
                        best_epoch: Some(best),
                        train_rmse: Some(train),
                        test_rmse: Some(test),
                        baseline_rmse: Some(baseline),
                        error: String::new(),
                    },
                    Err(e) => {
                        warn!("sweep cell {}={} failed: {e}", spec.axis, fmt_value(*v));
                        SweepRow {
                            axis: spec.axis,
                            value: *v,
                            status: "failed".into(),
                            best_epoch: None,
                            train_rmse: None,
                            test_rmse: None,
                            baseline_rmse: None,
                            error: e.to_string(),
                        }
                    }
                }
            })
            .collect()
    });

    let mut w = csv::Writer::from_path(out.join(format!("sweep_{}.csv", spec.axis)))?;
    w.write_record(["axis", "value", "status", "best_epoch", "train_rmse", "test_rmse", "baseline_rmse", "error"])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.axis.to_string(),
            fmt_value(r.value),
            r.status.clone(),
            r.best_epoch.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.train_rmse),
            opt(r.test_rmse),
            opt(r.baseline_rmse),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}
