//! Experiment orchestration behind the command-line tool: configuration
//! files, dataset generation, training runs, evaluation, sweeps, and report
//! verification.
//!
//! # Configuration file
//!
//! TOML with a top-level `version` key (currently 1):
//!
//! ```toml
//! version = 1
//! experiment = "lorenz"        # lorenz | swarm | hydro
//! seed = 1                     # dataset seed; below 2^63
//! output_dir = "runs/lorenz"
//!
//! [rnn]                        # RnnConfig
//! seq_len = 500
//! # ...
//!
//! [lorenz]                     # only the section named by `experiment` is read
//! n_orbits = 50
//! n_train = 40
//! eta = 5
//! integrator = "rk4"
//! [lorenz.system]
//! sigma = 3.0
//! # ...
//!
//! [sweep]                      # optional; used by the sweep command
//! axis = "eta"                 # eta | sigma | window
//! values = [1.0, 2.0, 3.0]
//! ```
//!
//! The top-level seed replaces the seeds inside the dataset sections.

mod data;
mod run;
mod sweep;
mod verify;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::SyntheticCatchment;
use crate::lorenz::{Integrator, LorenzParams};
use crate::rnn::{RnnConfig, SecondPass};
use crate::swarm::SwarmConfig;

pub use data::{
    read_flow_series, read_orbits, read_trajectories, write_flow_series, write_orbits, write_trajectories, FlowRow,
    Manifest, SequenceFile,
};
pub use run::{cmd_calibrate, cmd_eval, cmd_generate, cmd_train, Artifacts, EvalSummary, RunReport, REPORT_FORMAT};
pub use sweep::{cell_config, cmd_sweep, SweepRow};
pub use verify::{verify_report, Verification};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Lorenz,
    Swarm,
    Hydro,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Lorenz => "lorenz",
            Experiment::Swarm => "swarm",
            Experiment::Hydro => "hydro",
        })
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorenz" => Ok(Experiment::Lorenz),
            "swarm" => Ok(Experiment::Swarm),
            "hydro" => Ok(Experiment::Hydro),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzSection {
    pub n_orbits: usize,
    /// The first `n_train` orbits train; the rest are the test set.
    pub n_train: usize,
    pub eta: usize,
    pub integrator: Integrator,
    pub system: LorenzParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmSection {
    pub simulation: SwarmConfig,
    /// Standard deviation of the observation noise.
    pub sigma: f64,
    /// The first `n_train` agents train; the rest are the test set.
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroSection {
    /// Used when `data_file` is absent.
    pub catchment: SyntheticCatchment,
    /// A `date,p_mm,pet_mm,temp_c,q_mm` file to use instead of synthetic data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    pub train_days: usize,
    pub window_len: usize,
    /// Grid size for the GR4J benchmark.
    pub calibration_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Eta,
    Sigma,
    Window,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Eta => "eta",
            SweepAxis::Sigma => "sigma",
            SweepAxis::Window => "window",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(SweepAxis::Eta),
            "sigma" => Ok(SweepAxis::Sigma),
            "window" | "L" => Ok(SweepAxis::Window),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// The axis each experiment varies and its default values. The window
    /// list carries both 10 and 120.
    pub fn default_for(experiment: Experiment) -> Self {
        match experiment {
            Experiment::Lorenz => SweepSpec {
                axis: SweepAxis::Eta,
                values: (1..=9).map(f64::from).collect(),
            },
            Experiment::Swarm => SweepSpec {
                axis: SweepAxis::Sigma,
                values: vec![0.2, 0.4, 0.6],
            },
            Experiment::Hydro => SweepSpec {
                axis: SweepAxis::Window,
                values: vec![5.0, 15.0, 30.0, 45.0, 60.0, 10.0, 120.0, 240.0, 365.0],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub rnn: RnnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorenz: Option<LorenzSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swarm: Option<SwarmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    /// Full-size settings of each experiment.
    pub fn full(experiment: Experiment) -> Self {
        let mut cfg = ExperimentConfig {
            version: CONFIG_VERSION,
            experiment,
            seed: 1,
            output_dir: PathBuf::from("runs").join(experiment.to_string()),
            rnn: RnnConfig::lorenz(),
            lorenz: None,
            swarm: None,
            hydro: None,
            sweep: None,
        };
        match experiment {
            Experiment::Lorenz => {
                cfg.lorenz = Some(LorenzSection {
                    n_orbits: 500,
                    n_train: 400,
                    eta: 5,
                    integrator: Integrator::Rk4,
                    system: LorenzParams::default(),
                });
            }
            Experiment::Swarm => {
                cfg.rnn = RnnConfig::swarm();
                cfg.swarm = Some(SwarmSection {
                    simulation: SwarmConfig::default(),
                    sigma: 0.4,
                    n_train: 24,
                });
            }
            Experiment::Hydro => {
                cfg.rnn = RnnConfig::hydro();
                cfg.hydro = Some(HydroSection {
                    catchment: SyntheticCatchment::new(3653, 1),
                    data_file: None,
                    train_days: 2557,
                    window_len: 45,
                    calibration_points: 50_000,
                });
            }
        }
        cfg
    }

    /// Settings sized for minutes per training run on one core.
    pub fn desk(experiment: Experiment) -> Self {
        let mut cfg = Self::full(experiment);
        cfg.rnn.second_pass = SecondPass::Snapshot;
        match experiment {
            Experiment::Lorenz => {
                let sec = cfg.lorenz.as_mut().expect("lorenz preset");
                sec.n_orbits = 50;
                sec.n_train = 40;
                sec.system.steps = 500;
                cfg.rnn.seq_len = 500;
                cfg.rnn.hidden_size = 32;
                cfg.rnn.max_epochs = 1000;
            }
            Experiment::Swarm => {
                cfg.rnn.max_epochs = 200;
            }
            Experiment::Hydro => {
                let sec = cfg.hydro.as_mut().expect("hydro preset");
                sec.catchment.days = 800;
                sec.train_days = 600;
                cfg.rnn.hidden_size = 16;
                cfg.rnn.max_epochs = 1000;
            }
        }
        cfg.output_dir = PathBuf::from("runs").join(format!("{experiment}-desk"));
        cfg
    }

    pub fn preset(experiment: Experiment, desk: bool) -> Self {
        if desk {
            Self::desk(experiment)
        } else {
            Self::full(experiment)
        }
    }

    pub fn lorenz_section(&self) -> Result<&LorenzSection> {
        self.lorenz.as_ref().ok_or_else(|| Error::Config("missing [lorenz] section".into()))
    }

    pub fn swarm_section(&self) -> Result<&SwarmSection> {
        self.swarm.as_ref().ok_or_else(|| Error::Config("missing [swarm] section".into()))
    }

    pub fn hydro_section(&self) -> Result<&HydroSection> {
        self.hydro.as_ref().ok_or_else(|| Error::Config("missing [hydro] section".into()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must be below 2^63".into()));
        }
        self.rnn.validate()?;
        match self.experiment {
            Experiment::Lorenz => {
                let s = self.lorenz_section()?;
                s.system.validate()?;
                if s.n_train == 0 || s.n_train >= s.n_orbits {
                    return Err(Error::Config("lorenz.n_train must be in 1..n_orbits".into()));
                }
                if s.eta >= s.system.steps {
                    return Err(Error::Config("lorenz.eta must be below system.steps".into()));
                }
                self.expect_shape(s.system.steps, 3, 3)?;
            }
            Experiment::Swarm => {
                let s = self.swarm_section()?;
                s.simulation.validate()?;
                if !(s.sigma >= 0.0) {
                    return Err(Error::Config("swarm.sigma must be >= 0".into()));
                }
                if s.n_train == 0 || s.n_train >= s.simulation.n_agents {
                    return Err(Error::Config("swarm.n_train must be in 1..n_agents".into()));
                }
                self.expect_shape(s.simulation.steps, 2, 2)?;
            }
            Experiment::Hydro => {
                let s = self.hydro_section()?;
                if s.data_file.is_none() {
                    s.catchment.params.validate()?;
                    if s.train_days >= s.catchment.days {
                        return Err(Error::Config("hydro.train_days must be below catchment.days".into()));
                    }
                }
                if s.window_len == 0 || s.window_len > s.train_days {
                    return Err(Error::Config("hydro.window_len must be in 1..=train_days".into()));
                }
                if s.calibration_points == 0 {
                    return Err(Error::Config("hydro.calibration_points must be positive".into()));
                }
                self.expect_shape(s.window_len, 2, 1)?;
            }
        }
        Ok(())
    }

    fn expect_shape(&self, seq_len: usize, input: usize, output: usize) -> Result<()> {
        let r = &self.rnn;
        if (r.seq_len, r.input_size, r.output_size) != (seq_len, input, output) {
            return Err(Error::Config(format!(
                "rnn expects seq_len/input/output {}/{}/{}, dataset gives {seq_len}/{input}/{output}",
                r.seq_len, r.input_size, r.output_size
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::TomlDe(inner) => Error::Config(format!("{}: {inner}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for e in [Experiment::Lorenz, Experiment::Swarm, Experiment::Hydro] {
            for desk in [false, true] {
                let cfg = ExperimentConfig::preset(e, desk);
                cfg.validate().unwrap();
                let text = cfg.to_toml().unwrap();
                assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{e} desk={desk}\n{text}");
            }
        }
    }

    #[test]
    fn full_size_rows() {
        let l = ExperimentConfig::full(Experiment::Lorenz).rnn;
        assert_eq!((l.seq_len, l.input_size, l.output_size, l.num_layers, l.hidden_size), (5000, 3, 3, 3, 128));
        assert_eq!(l.learning_rate, 0.01);
        let s = ExperimentConfig::full(Experiment::Swarm).rnn;
        assert_eq!((s.seq_len, s.num_layers, s.hidden_size, s.learning_rate), (201, 2, 64, 0.0005));
        let h = ExperimentConfig::full(Experiment::Hydro).rnn;
        assert_eq!((h.input_size, h.output_size, h.hidden_size), (2, 1, 512));
    }

    #[test]
    fn bad_key_reported() {
        let mut text = ExperimentConfig::desk(Experiment::Swarm).to_toml().unwrap();
        text = text.replace("version = 1", "version = 2");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
        let err = ExperimentConfig::from_toml("version = 1\nexperiment = \"swarm\"\n").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("seed"), "{err}");
    }
}
