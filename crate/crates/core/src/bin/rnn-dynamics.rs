use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use rnn_dynamics::experiment::{
    cmd_calibrate, cmd_eval, cmd_generate, cmd_sweep, cmd_train, verify_report, Experiment, ExperimentConfig,
    SweepSpec,
};
use rnn_dynamics::{Error, Result};

/// Stacked RNN experiments: Lorenz orbit correction, swarm trajectory
/// denoising, and streamflow forecasting against GR4J.
#[derive(Debug, Parser)]
#[command(name = "rnn-dynamics", version)]
struct Cli {
    /// TOML experiment configuration; defaults to the built-in preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset seed (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for calibration and sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Use the desk-scale preset instead of the full-size one.
    #[arg(long, global = true)]
    desk: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    /// Lorenz corruption level.
    #[arg(long)]
    eta: Option<usize>,
    /// Swarm observation noise.
    #[arg(long)]
    sigma: Option<f64>,
    /// Streamflow window length.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a dataset, its manifest and the configuration used into <out>/data.
    Generate {
        experiment: Option<Experiment>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train on <out>/data (or --data) and write checkpoint, predictions and report.json.
    Train {
        experiment: Option<Experiment>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score a checkpoint on the test split, or the forecast span.
    Eval {
        experiment: Option<Experiment>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate, train and evaluate once per value of the experiment's sweep axis.
    Sweep {
        experiment: Option<Experiment>,
        /// Comma-separated axis values; defaults to the configured or built-in list.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Grid-search GR4J parameters on the training span.
    Calibrate {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Number of sampled parameter sets.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Recompute every number of a report.json from the files it lists.
    VerifyReport { report: PathBuf },
}

fn resolve(cli: &Cli, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(e)) => ExperimentConfig::preset(e, cli.desk),
        (None, None) => return Err(Error::Config("name an experiment or pass --config".into())),
    };
    if let Some(e) = experiment {
        if e != cfg.experiment {
            return Err(Error::Config(format!("configuration is for {}, not {e}", cfg.experiment)));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut ExperimentConfig, o: &Overrides) -> Result<()> {
    if let Some(eta) = o.eta {
        cfg.lorenz.as_mut().ok_or_else(|| Error::Config("--eta applies to lorenz".into()))?.eta = eta;
    }
    if let Some(sigma) = o.sigma {
        cfg.swarm.as_mut().ok_or_else(|| Error::Config("--sigma applies to swarm".into()))?.sigma = sigma;
    }
    if let Some(l) = o.window {
        cfg.hydro.as_mut().ok_or_else(|| Error::Config("--window applies to hydro".into()))?.window_len = l;
        cfg.rnn.seq_len = l;
    }
    cfg.validate()
}

fn data_dir(cfg: &ExperimentConfig, data: &Option<PathBuf>) -> PathBuf {
    data.clone().unwrap_or_else(|| cfg.output_dir.join("data"))
}

fn run(cli: &Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    match &cli.command {
        Command::Generate { experiment, overrides } => {
            let mut cfg = resolve(cli, *experiment)?;
            apply(&mut cfg, overrides)?;
            let dir = cfg.output_dir.join("data");
            for f in cmd_generate(&cfg, &dir)? {
                println!("{}", f.display());
            }
            cfg.save(&dir.join("config.toml"))?;
        }
        Command::Train {
            experiment,
            data,
            overrides,
        } => {
            let mut cfg = resolve(cli, *experiment)?;
            apply(&mut cfg, overrides)?;
            let r = cmd_train(&cfg, &data_dir(&cfg, data), &cfg.output_dir)?;
            println!("best_epoch,train_rmse,test_rmse,baseline_rmse,seconds");
            println!(
                "{},{},{},{},{:.1}",
                r.best_epoch, r.train_rmse, r.test_rmse, r.baseline_rmse, r.wall_clock_seconds
            );
        }
        Command::Eval {
            experiment,
            checkpoint,
            data,
            overrides,
        } => {
            let mut cfg = resolve(cli, *experiment)?;
            apply(&mut cfg, overrides)?;
            let ck = checkpoint.clone().unwrap_or_else(|| cfg.output_dir.join("checkpoint.json"));
            let summary = cmd_eval(&cfg, &ck, &data_dir(&cfg, data), &cfg.output_dir.join("eval"))?;
            println!("split,count,rmse,baseline_rmse");
            for (split, n, r, b) in summary.rows {
                println!("{split},{n},{r},{}", b.map(|b| b.to_string()).unwrap_or_default());
            }
        }
        Command::Sweep { experiment, values } => {
            let mut cfg = resolve(cli, *experiment)?;
            if !values.is_empty() {
                let axis = cfg
                    .sweep
                    .as_ref()
                    .map_or_else(|| SweepSpec::default_for(cfg.experiment).axis, |s| s.axis);
                cfg.sweep = Some(SweepSpec {
                    axis,
                    values: values.clone(),
                });
            }
            let rows = cmd_sweep(&cfg, &cfg.output_dir, cli.jobs)?;
            println!("axis,value,status,test_rmse,baseline_rmse");
            for r in &rows {
                let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
                println!("{},{},{},{},{}", r.axis, r.value, r.status, f(r.test_rmse), f(r.baseline_rmse));
            }
            if rows.iter().all(|r| r.status != "ok") {
                return Err(Error::Data("every sweep cell failed".into()));
            }
        }
        Command::Calibrate { data, points } => {
            let mut cfg = resolve(cli, cli.config.is_none().then_some(Experiment::Hydro))?;
            if let Some(n) = points {
                cfg.hydro.as_mut().ok_or_else(|| Error::Config("calibration needs a hydro configuration".into()))?.calibration_points = *n;
            }
            let result = cmd_calibrate(&cfg, &data_dir(&cfg, data), &cfg.output_dir)?;
            let p = result.best;
            println!("x1,x2,x3,x4,tt,cfmax,cfr,cwh,rmse");
            println!(
                "{},{},{},{},{},{},{},{},{}",
                p.x1, p.x2, p.x3, p.x4, p.tt, p.cfmax, p.cfr, p.cwh, result.best_rmse
            );
        }
        Command::VerifyReport { report } => {
            let v = verify_report(Path::new(report))?;
            for (name, reported, recomputed) in &v.checks {
                println!("{name}: reported {reported} recomputed {recomputed}");
            }
            if !v.passed() {
                return Err(Error::Data(format!("{} value(s) do not match the artifacts", v.failures().len())));
            }
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

