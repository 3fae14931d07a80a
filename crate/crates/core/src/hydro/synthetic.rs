use std::f64::consts::PI;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use super::model::{simulate_from, Gr4jState};
use super::params::Gr4jParams;
use super::HydroRecord;
use crate::error::{Error, Result};
use crate::rng::sub_rng;

/// Offline stand-in for a gauged catchment: seasonal forcing with random
/// storms, streamflow from GR4J, and multiplicative log-normal flow noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCatchment {
    pub days: usize,
    pub seed: u64,
    pub params: Gr4jParams,
    pub start_date: NaiveDate,
    /// Mean and seasonal amplitude of daily temperature (°C).
    pub temp_mean: f64,
    pub temp_amplitude: f64,
    pub temp_noise: f64,
    /// Probability that a day has rain or snow.
    pub wet_probability: f64,
    /// Mean depth on a wet day (mm).
    pub storm_mean: f64,
    /// Gamma shape of storm depths; below 1 gives heavy tails.
    pub storm_shape: f64,
    pub pet_mean: f64,
    pub pet_amplitude: f64,
    /// Standard deviation of the log flow error.
    pub flow_noise: f64,
    /// Days simulated and discarded before the first record.
    pub spinup_days: usize,
}

impl SyntheticCatchment {
    pub fn new(days: usize, seed: u64) -> Self {
        SyntheticCatchment {
            days,
            seed,
            params: Gr4jParams::site1(),
            start_date: NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date"),
            temp_mean: 9.0,
            temp_amplitude: 11.0,
            temp_noise: 2.5,
            wet_probability: 0.4,
            storm_mean: 9.0,
            storm_shape: 0.7,
            pet_mean: 2.0,
            pet_amplitude: 1.8,
            flow_noise: 0.1,
            spinup_days: 365,
        }
    }

    fn forcing(&self, n: usize) -> Result<Vec<HydroRecord>> {
        let mut rng = sub_rng(self.seed, 0);
        let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Config(e.to_string()))?;
        let storms = Gamma::new(self.storm_shape, self.storm_mean / self.storm_shape)
            .map_err(|e| Error::Config(format!("storm distribution: {e}")))?;
        let start = self.start_date - Duration::days(self.spinup_days as i64);
        Ok((0..n)
            .map(|d| {
                let season = (2.0 * PI * (d as f64 - 105.0) / 365.25).sin();
                let temp = self.temp_mean + self.temp_amplitude * season + self.temp_noise * normal.sample(&mut rng);
                let wet = rng.gen::<f64>() < self.wet_probability;
                let depth = storms.sample(&mut rng);
                let pet = (self.pet_mean + self.pet_amplitude * season + 0.3 * normal.sample(&mut rng)).max(0.0);
                HydroRecord {
                    day_index: d,
                    date: start + Duration::days(d as i64),
                    precip: if wet { depth } else { 0.0 },
                    pet,
                    temp,
                    flow: None,
                }
            })
            .collect())
    }

    /// Records with noisy observed flow and the noise-free simulated flow.
    pub fn generate_with_truth(&self) -> Result<(Vec<HydroRecord>, Vec<f64>)> {
        self.params.validate()?;
        if self.days == 0 {
            return Err(Error::Config("synthetic catchment needs at least one day".into()));
        }
        if !(self.flow_noise >= 0.0) {
            return Err(Error::Config("flow_noise must be non-negative".into()));
        }
        let mut recs = self.forcing(self.spinup_days + self.days)?;
        let sim = simulate_from(&recs, &self.params, Gr4jState::initial(&self.params))?;
        let mut rng = sub_rng(self.seed, 1);
        let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Config(e.to_string()))?;
        let sd = self.flow_noise;
        let mut truth = Vec::with_capacity(self.days);
        for (i, r) in recs.iter_mut().enumerate() {
            let z: f64 = normal.sample(&mut rng);
            if i >= self.spinup_days {
                r.flow = Some(sim.q[i] * (sd * z - 0.5 * sd * sd).exp());
                truth.push(sim.q[i]);
            }
        }
        let mut out = recs.split_off(self.spinup_days);
        for (i, r) in out.iter_mut().enumerate() {
            r.day_index = i;
        }
        Ok((out, truth))
    }

    pub fn generate(&self) -> Result<Vec<HydroRecord>> {
        self.generate_with_truth().map(|(r, _)| r)
    }
}
